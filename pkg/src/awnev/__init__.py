"""Askey-Wilson divided-difference calculus and slow-growth value distribution.

Modules
-------
qcore
    q-arithmetic, truncated infinite products, Joukowski branch geometry.
funcrep
    Product-form function representation with exact zero/pole lattices.
awops
    The divided-difference operator D_q, averaging operator A_q, basis
    action, Chebyshev expansions and the interpolation series.
nevanlinna
    Classical and lattice-aware counting/proximity/characteristic
    functionals, deficiencies and the associated numeric checkers.
kernel
    D_q-kernel construction, membership, identity solving, theta functions.
asymptotics
    Explicit log-modulus asymptotics of q-infinite products.
awpoly
    Askey-Wilson polynomials, weights, difference equation, orthogonality.
exprcli
    Expression parser and the command-line interface.
"""

__version__ = "0.1.0"
