"""Complex q-arithmetic, truncated infinite products and branch geometry.

Everything downstream consumes the Joukowski variable z only through
:func:`lift_to_z`, which fixes the |z| >= 1 branch once and for all:
z ~ 2x at infinity, and for real x in [-1, 1] the value is taken from
above the real axis, z = x + i*sqrt(1 - x^2).
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateGenerator, InvalidParams, TruncationExceeded

__all__ = [
    "QParam",
    "JoukowskiPoint",
    "TruncationPolicy",
    "DEFAULT_POLICY",
    "qpoch_finite",
    "qpoch_infinite",
    "log_qpoch_infinite",
    "lift_to_z",
    "lift_to_z_array",
    "hat_check",
    "lattice_point",
]


@dataclass(frozen=True)
class QParam:
    """Deformation parameter q with 0 < |q| < 1 and its fixed square root.

    ``sqrt_q`` is the principal root, computed once; every occurrence of
    q^(1/2) in the package goes through this field so that signs stay
    consistent across the divided-difference and averaging operators.
    """

    q: complex
    sqrt_q: complex
    abs_q: float

    def __init__(self, q: complex):
        q = complex(q)
        aq = abs(q)
        if not 0.0 < aq < 1.0:
            raise InvalidParams(f"need 0 < |q| < 1, got |q| = {aq}")
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "sqrt_q", cmath.sqrt(q))
        object.__setattr__(self, "abs_q", aq)


@dataclass(frozen=True)
class TruncationPolicy:
    """Absolute log-error tolerance and a hard cap on product terms."""

    abs_tol: float = 1e-14
    max_terms: int = 10**6

    def __post_init__(self):
        if self.abs_tol <= 0:
            raise InvalidParams("abs_tol must be positive")
        if self.max_terms < 1:
            raise InvalidParams("max_terms must be >= 1")


DEFAULT_POLICY = TruncationPolicy()


@dataclass(frozen=True)
class JoukowskiPoint:
    """A point x together with its chosen branch representative z, |z| >= 1."""

    x: complex
    z: complex


def _as_q(q) -> complex:
    return q.q if isinstance(q, QParam) else complex(q)


def qpoch_finite(a: complex, q, n: int) -> complex:
    """Finite q-shifted factorial (a; q)_n = prod_{k=1..n} (1 - a q^(k-1))."""
    if n < 0:
        raise InvalidParams("n must be nonnegative")
    qq = _as_q(q)
    out = 1.0 + 0.0j
    f = complex(a)
    for _ in range(n):
        out *= 1.0 - f
        f *= qq
    return out


def _truncation_index(abs_a: float, abs_q: float, policy: TruncationPolicy) -> int:
    """Smallest N with tail bound sum_{k>N} |a||q|^{k-1}/(1-|a||q|^{k-1}) <= tol.

    The bound requires |a||q|^N <= 1/2 so that the geometric estimate
    t/(1-t) <= 2t applies; below that the tail is <= 2|a||q|^N/(1-|q|).
    """
    if abs_a == 0.0:
        return 0
    # first index where |a||q|^N <= 1/2
    if abs_a > 0.5:
        n0 = int(math.ceil(math.log(0.5 / abs_a) / math.log(abs_q)))
    else:
        n0 = 0
    target = policy.abs_tol * (1.0 - abs_q) / (2.0 * abs_a)
    if target >= 1.0:
        n1 = 0
    else:
        n1 = int(math.ceil(math.log(target) / math.log(abs_q)))
    n = max(n0, n1, 0)
    if n > policy.max_terms:
        raise TruncationExceeded(
            f"{n} terms needed for tail bound {policy.abs_tol}, cap {policy.max_terms}"
        )
    return n


def log_qpoch_infinite(a, q, policy: TruncationPolicy = DEFAULT_POLICY):
    """log (a; q)_infinity with absolute log-error <= policy.abs_tol.

    ``a`` may be a complex scalar or a numpy array (vectorized over a).
    Returns the sum of principal-branch logs of the factors; the real part
    is exact within the tail bound, the imaginary part is a per-factor
    principal-value sum (adequate everywhere we consume it).
    A factor vanishing exactly yields real part -inf.
    """
    qq = _as_q(q)
    a_arr = np.asarray(a, dtype=complex)
    abs_a = float(np.max(np.abs(a_arr))) if a_arr.size else 0.0
    n = _truncation_index(abs_a, abs(qq), policy)
    out = np.zeros_like(a_arr)
    f = a_arr.copy()
    with np.errstate(divide="ignore", invalid="ignore"):
        for _ in range(n):
            out = out + np.log(1.0 - f)
            f = f * qq
    if a_arr.ndim == 0:
        return complex(out)
    return out


def qpoch_infinite(a: complex, q, policy: TruncationPolicy = DEFAULT_POLICY) -> complex:
    """Infinite q-shifted factorial (a; q)_infinity for |q| < 1."""
    lg = log_qpoch_infinite(a, q, policy)
    if isinstance(lg, np.ndarray):
        return np.exp(lg)
    if lg.real == -math.inf:
        return 0.0 + 0.0j
    return cmath.exp(lg)


def lift_to_z_array(x) -> np.ndarray:
    """Vectorized branch lift: z with x = (z + 1/z)/2 and |z| >= 1.

    For x off [-1, 1] this is z = x + sqrt(x^2 - 1) with the root chosen so
    |z| >= 1; on the cut the principal square root of x^2 - 1 already gives
    the limit from above the real axis, z = x + i sqrt(1 - x^2).
    """
    xa = np.asarray(x, dtype=complex)
    w = np.sqrt(xa * xa - 1.0)
    z1 = xa + w
    z2 = xa - w
    take2 = np.abs(z1) < np.abs(z2)
    z = np.where(take2, z2, z1)
    # on the cut both roots have |z| = 1; keep the upper-half representative
    on_cut = np.isclose(np.abs(z1), np.abs(z2), rtol=1e-15, atol=1e-300)
    if np.any(on_cut):
        zu = np.where(z1.imag >= z2.imag, z1, z2)
        z = np.where(on_cut, zu, z)
    return z


def lift_to_z(x: complex) -> JoukowskiPoint:
    """Lift a single point to its |z| >= 1 branch representative."""
    z = complex(lift_to_z_array(complex(x)))
    return JoukowskiPoint(x=complex(x), z=z)


def hat_check(p: JoukowskiPoint, q: QParam) -> tuple[complex, complex]:
    """Shifted points x-hat and x-check of the divided-difference geometry.

    x-hat = (q^(1/2) z + q^(-1/2)/z)/2, x-check = (q^(-1/2) z + q^(1/2)/z)/2.
    """
    s = q.sqrt_q
    z = p.z
    xhat = (s * z + 1.0 / (s * z)) / 2.0
    xchk = (z / s + s / z) / 2.0
    return xhat, xchk


def lattice_point(a: complex, q, n: int) -> complex:
    """Lattice point x_n = (a q^n + q^(-n)/a)/2 for generator a != 0.

    ``q`` may be a QParam or a bare complex base (the factor bases of
    product forms are not always the operator's q).
    """
    if a == 0:
        raise DegenerateGenerator("lattice generator a = 0")
    qq = _as_q(q)
    qn = qq**n
    return (a * qn + 1.0 / (a * qn)) / 2.0
