"""Askey-Wilson polynomials, weights, and their structural identities.

Provides the terminating basic-hypergeometric evaluation of the polynomials,
the orthogonality weight and its shifted family, numeric residual checks of
the self-adjoint second-order divided-difference equation and the
Rodrigues-type formula, Gauss-Legendre orthogonality integrals, and the two
Rogers generating-function checks (continuous q-Hermite and continuous
q-ultraspherical).

All divided differences inside the residuals are applied numerically via
the operator module; nothing is simplified symbolically, so the checks are
independent of the closed forms they validate.  The weight is handled as a
z-antisymmetric breve function (the sin(theta) factor flips sign under
z <-> 1/z); the divided-difference quotient of an antisymmetric breve is
again well-defined and the equation pairs antisymmetric sides consistently.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .awops import dq_breve
from .errors import (
    BranchDegenerate,
    InvalidParams,
    OutOfRange,
    PoleHit,
    QuadratureNonconvergent,
)
from .funcrep import ProductFactor, ProductForm, evaluate
from .qcore import DEFAULT_POLICY, QParam, lift_to_z_array, qpoch_finite, qpoch_infinite

__all__ = [
    "AWParams",
    "GenKind",
    "aw_polynomial",
    "aw_weight",
    "eigenvalue",
    "eigen_residual",
    "rodrigues_residual",
    "orthogonality_check",
    "generating_residual",
]

BRANCH_TOL = 1e-12
POLE_TOL = 1e-12


@dataclass(frozen=True)
class AWParams:
    """The four parameters and base of the Askey-Wilson family."""

    a: complex
    b: complex
    c: complex
    d: complex
    q: QParam

    def __post_init__(self):
        for name in ("a", "b", "c", "d"):
            object.__setattr__(self, name, complex(getattr(self, name)))

    @property
    def abcd(self) -> complex:
        return self.a * self.b * self.c * self.d

    def params(self) -> tuple:
        return (self.a, self.b, self.c, self.d)

    def shifted(self, k: int) -> "AWParams":
        """The k-shifted family: every parameter multiplied by q^(k/2)."""
        s = self.q.sqrt_q**k
        return AWParams(self.a * s, self.b * s, self.c * s, self.d * s, self.q)

    def admissible(self) -> bool:
        """Real or conjugate-paired parameters with max modulus < 1."""
        ps = list(self.params())
        if max(abs(p) for p in ps) >= 1.0:
            return False
        complexes = [p for p in ps if abs(p.imag) > 1e-14]
        while complexes:
            p = complexes.pop()
            mate = next((w for w in complexes if abs(w - p.conjugate()) < 1e-12), None)
            if mate is None:
                return False
            complexes.remove(mate)
        return True


def polynomial_breve(n: int, p: AWParams, policy=DEFAULT_POLICY):
    """The n-th polynomial as a z-symmetric breve callable.

    p_n = a^(-n) (ab, ac, ad; q)_n * sum of n+1 terms with the term ratio
    updated multiplicatively; the (a e^(i theta), a e^(-i theta); q)_k pair
    collapses to the real-polynomial factor (1 - 2 a x q^k + a^2 q^(2k)).
    """
    if n < 0:
        raise InvalidParams("n must be >= 0")
    a, b, c, d = p.params()
    q = p.q.q
    abcd = p.abcd
    if a == 0:
        raise InvalidParams("leading parameter a must be nonzero")
    pref = (
        qpoch_finite(a * b, p.q, n)
        * qpoch_finite(a * c, p.q, n)
        * qpoch_finite(a * d, p.q, n)
        / a**n
    )

    def g(z: complex) -> complex:
        x = (z + 1.0 / z) / 2.0
        total = 1.0 + 0.0j
        term = 1.0 + 0.0j
        for k in range(n):
            num = (
                (1.0 - q ** (k - n))
                * (1.0 - abcd * q ** (n - 1 + k))
                * (1.0 - 2.0 * a * x * q**k + a * a * q ** (2 * k))
                * q
            )
            den = (
                (1.0 - a * b * q**k)
                * (1.0 - a * c * q**k)
                * (1.0 - a * d * q**k)
                * (1.0 - q ** (k + 1))
            )
            term *= num / den
            total += term
        return pref * total

    return g


def aw_polynomial(n: int, p: AWParams, x: complex, policy=DEFAULT_POLICY) -> complex:
    """p_n(x; a, b, c, d | q) evaluated at a complex point."""
    z = complex(lift_to_z_array(complex(x)))
    return polynomial_breve(n, p, policy)(z)


def weight_breve(p: AWParams, shift: int = 0, policy=DEFAULT_POLICY):
    """The orthogonality weight of the shift-k family as a breve callable.

    omega(x) = (z^2, z^-2; q)_inf / (prod_p (p z, p/z; q)_inf * sin(theta))
    with sin(theta) = (z - 1/z)/(2i); antisymmetric under z <-> 1/z.
    """
    ps = p.shifted(shift).params()
    q = p.q

    def g(z: complex) -> complex:
        z = complex(z)
        sin_t = (z - 1.0 / z) / 2.0j
        if abs(sin_t) < BRANCH_TOL:
            raise BranchDegenerate("weight is singular at x = +-1")
        num = qpoch_infinite(z * z, q, policy) * qpoch_infinite(1.0 / (z * z), q, policy)
        den = sin_t
        for w in ps:
            den *= qpoch_infinite(w * z, q, policy) * qpoch_infinite(w / z, q, policy)
        if den == 0:
            raise PoleHit("x is a pole of the weight")
        return num / den

    return g


def aw_weight(x: complex, p: AWParams, shift: int = 0, policy=DEFAULT_POLICY) -> complex:
    """omega(x; a q^(shift/2), ..., d q^(shift/2) | q) at a point off the poles."""
    x = complex(x)
    if min(abs(x - 1.0), abs(x + 1.0)) < 1e-9:
        raise BranchDegenerate("weight is singular at x = +-1")
    z = complex(lift_to_z_array(x))
    return weight_breve(p, shift, policy)(z)


def eigenvalue(n: int, p: AWParams) -> complex:
    """lambda_n = 4 q^(-n+1) (1 - q^n)(1 - abcd q^(n-1))."""
    if n < 0:
        raise InvalidParams("n must be >= 0")
    q = p.q.q
    return 4.0 * q ** (-n + 1) * (1.0 - q**n) * (1.0 - p.abcd * q ** (n - 1))


def _default_x_grid():
    return np.linspace(-0.87, 0.91, 13)


def eigen_residual(n: int, p: AWParams, grid=None, policy=DEFAULT_POLICY) -> float:
    """Max relative residual of the self-adjoint difference equation on the grid.

    (1 - q)^2 D_q[omega-tilde * D_q p_n] + lambda_n * omega * p_n = 0,
    with omega-tilde the shift-1 weight and every D_q applied numerically.
    """
    if grid is None:
        grid = _default_x_grid()
    q = p.q
    lam = eigenvalue(n, p)
    pn = polynomial_breve(n, p, policy)
    flux = dq_breve(pn, q)
    wt = weight_breve(p, 1, policy)
    w0 = weight_breve(p, 0, policy)
    outer = dq_breve(lambda z: wt(z) * flux(z), q)
    worst = 0.0
    for x in grid:
        z = complex(lift_to_z_array(complex(x)))
        lhs = (1.0 - q.q) ** 2 * outer(z)
        rhs = lam * w0(z) * pn(z)
        scale = max(abs(lhs), abs(rhs), 1.0)
        worst = max(worst, abs(lhs + rhs) / scale)
    return worst


def rodrigues_residual(n: int, p: AWParams, grid=None, policy=DEFAULT_POLICY) -> float:
    """Max relative residual of the Rodrigues-type formula on the grid.

    (D_q)^n [shift-n weight] = ((q-1)/2)^(-n) q^(-n(n-1)/4) * omega * p_n.
    The q-exponent -n(n-1)/4 and the unshifted weight on the right-hand
    side are fixed by direct numeric comparison of the two sides (the
    alternative normalizations fail already at n = 2).
    """
    if n < 1:
        raise InvalidParams("n must be >= 1")
    if grid is None:
        grid = _default_x_grid()
    q = p.q
    g = weight_breve(p, n, policy)
    for _ in range(n):
        g = dq_breve(g, q)
    const = ((q.q - 1.0) / 2.0) ** (-n) * q.q ** (-n * (n - 1) / 4.0)
    w0 = weight_breve(p, 0, policy)
    pn = polynomial_breve(n, p, policy)
    worst = 0.0
    for x in grid:
        z = complex(lift_to_z_array(complex(x)))
        lhs = g(z)
        rhs = const * w0(z) * pn(z)
        scale = max(abs(lhs), abs(rhs), 1.0)
        worst = max(worst, abs(lhs - rhs) / scale)
    return worst


def orthogonality_check(
    m: int, n: int, p: AWParams, quad_nodes: int = 256, policy=DEFAULT_POLICY
) -> complex:
    """integral over [-1, 1] of p_m p_n omega dx by Gauss-Legendre in theta.

    The substitution x = cos(t) turns omega dx into a smooth integrand
    (the sin factors cancel exactly), so plain Gauss-Legendre converges
    geometrically; convergence is verified by comparing two node counts.
    """
    if not p.admissible():
        raise OutOfRange("orthogonality requires admissible parameters")
    pm = polynomial_breve(m, p, policy)
    pn = polynomial_breve(n, p, policy)
    ps = p.params()
    q = p.q

    def integrand(t: float) -> complex:
        z = cmath.exp(1j * t)
        num = qpoch_infinite(z * z, q, policy) * qpoch_infinite(1.0 / (z * z), q, policy)
        den = 1.0 + 0.0j
        for w in ps:
            den *= qpoch_infinite(w * z, q, policy) * qpoch_infinite(w / z, q, policy)
        return pm(z) * pn(z) * num / den

    def gauss(k: int) -> complex:
        nodes, weights = np.polynomial.legendre.leggauss(k)
        ts = 0.5 * math.pi * (nodes + 1.0)
        return complex(sum(w * integrand(t) for t, w in zip(ts, weights)) * 0.5 * math.pi)

    coarse = gauss(quad_nodes // 2)
    fine = gauss(quad_nodes)
    scale = max(abs(fine), abs(coarse), 1e-30)
    if abs(fine - coarse) > 1e-9 * max(scale, 1.0):
        raise QuadratureNonconvergent(
            f"orthogonality quadrature has not settled at {quad_nodes} nodes"
        )
    return fine


class GenKind(Enum):
    qHermite = "qHermite"
    qUltraspherical = "qUltraspherical"


def _hermite_coeff(k: int, z: complex, q: QParam) -> complex:
    """H_k(x | q) = sum_j [k choose j]_q z^(k - 2j), z = e^(i theta)."""
    qq_k = qpoch_finite(q.q, q, k)
    total = 0.0 + 0.0j
    for j in range(k + 1):
        total += (
            qq_k
            / (qpoch_finite(q.q, q, j) * qpoch_finite(q.q, q, k - j))
            * z ** (k - 2 * j)
        )
    return total


def _ultra_coeff(n: int, z: complex, beta: complex, q: QParam) -> complex:
    """C_n(x; beta | q) with T_m(x) = (z^m + z^(-m))/2."""
    total = 0.0 + 0.0j
    for k in range(n + 1):
        m = n - 2 * k
        cheb = 1.0 if m == 0 else (z**m + z**-m) / 2.0
        total += (
            qpoch_finite(beta, q, k)
            * qpoch_finite(beta, q, n - k)
            / (qpoch_finite(q.q, q, k) * qpoch_finite(q.q, q, n - k))
            * cheb
        )
    return total


def generating_residual(
    kind,
    t: complex,
    beta: complex,
    x: complex,
    q: QParam,
    K: int = None,
    policy=DEFAULT_POLICY,
) -> float:
    """|product-form generating function - truncated coefficient series|.

    qHermite: 1/(t e^(i theta), t e^(-i theta); q)_inf = sum H_k t^k/(q; q)_k.
    qUltraspherical: (beta t e^(+-i theta); q)_inf / (t e^(+-i theta); q)_inf
    = sum C_n(x; beta) t^n.  K defaults to the point where the geometric
    tail bound of the series drops below 1e-12.
    """
    kind = GenKind(kind) if not isinstance(kind, GenKind) else kind
    t = complex(t)
    if not 0.0 < abs(t) < 1.0:
        raise OutOfRange("the series requires 0 < |t| < 1")
    z = complex(lift_to_z_array(complex(x)))
    growth = max(abs(z), 1.0 / abs(z))
    if abs(t) * growth >= 1.0:
        raise OutOfRange("|t| max(|z|, 1/|z|) must be < 1 for convergence")
    if K is None:
        # coefficients grow at most like C * growth^k; bound the tail
        ratio = abs(t) * growth
        K = max(10, math.ceil(math.log(1e-12 * (1.0 - ratio)) / math.log(ratio)))
    if kind is GenKind.qHermite:
        lhs = evaluate(
            ProductForm(1.0, (), (ProductFactor(t, q.q, -1),), q), x, policy
        )
        series = sum(
            _hermite_coeff(k, z, q) / qpoch_finite(q.q, q, k) * t**k for k in range(K + 1)
        )
    else:
        beta = complex(beta)
        lhs = evaluate(
            ProductForm(
                1.0,
                (),
                (ProductFactor(beta * t, q.q, 1), ProductFactor(t, q.q, -1)),
                q,
            ),
            x,
            policy,
        )
        series = sum(_ultra_coeff(n, z, beta, q) * t**n for n in range(K + 1))
    return abs(lhs - series)
