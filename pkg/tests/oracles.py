"""Independent reference computations used by the tests.

These re-derive values from the closed-form formulas with mpmath or exact
rationals, without calling into the package's own helpers.
"""

from __future__ import annotations

from fractions import Fraction

import mpmath as mp


def ball_volume(d: int, r) -> mp.mpf:
    if d == 1:
        return 2 * mp.mpf(r)
    return mp.pi ** (mp.mpf(d) / 2) / mp.gamma(mp.mpf(d) / 2 + 1) * mp.mpf(r) ** d


def proposition_quadruple(lam, Lam, q, g_norm) -> tuple[Fraction, Fraction, Fraction, Fraction]:
    lam, Lam, q, g = (Fraction(x) for x in (lam, Lam, q, g_norm))
    return lam / 2, 5 * Lam**2 / lam, g, q / (q - 1)


def gradient_bound(d: int, k, g1, g2, g3, p) -> mp.mpf:
    v = ball_volume(d, mp.mpf(3) / 2)
    k, g1, g2, g3, p = (mp.mpf(x) for x in (k, g1, g2, g3, p))
    return (1 - k) ** 2 / g1 * v + 32 * g2 / g1 * v * (1 - k) ** 2 + 2 ** (1 / p) * g3 / g1 * v ** (1 / p) * (1 - k)


def iteration_exponent(p, rho) -> mp.mpf:
    p = mp.mpf(p)
    if rho == mp.inf:
        return 2 / p
    return (2 - 2 / mp.mpf(rho)) / p


def threshold(C, alpha) -> mp.mpf:
    C, a = mp.mpf(C), mp.mpf(alpha)
    return C ** (-(a**2) / (a - 1) ** 2)


def holder_from_log2_mu(log2_mu: int) -> tuple[mp.mpf, mp.mpf]:
    """``(1 - theta, alpha)`` for ``theta = 1 - 2^(log2_mu - 1)`` and ``alpha = -log2 theta``.

    ``1 - theta`` is returned rather than ``theta`` because it is far below
    any working precision; mpmath exponents are unbounded, so it stays exact.
    """
    eps = mp.mpf(2) ** (log2_mu - 1)
    alpha = -mp.log1p(-eps) / mp.log(2)
    return eps, alpha


def heat_mode(t, x, t_lo=-4.0, R=2.0):
    """``exp(-(pi/(2R))^2 (t - t_lo)) sin(pi (x + R) / (2R))``: the slowest Dirichlet mode on (-R, R)."""
    k = mp.pi / (2 * R)
    return mp.e ** (-(k**2) * (t - t_lo)) * mp.sin(k * (x + R))


def sk_direct(alpha: Fraction, k: int) -> Fraction:
    return sum((i * alpha ** (k - i) for i in range(1, k + 1)), Fraction(0))


def geometric_derivative(X, k: int) -> mp.mpf:
    X = mp.mpf(X)
    return mp.fsum(i * X ** (i - 1) for i in range(1, k + 1))


def stability_limit(d: int, Lam, dx) -> Fraction:
    Lam, dx = Fraction(Lam), Fraction(dx)
    return dx * dx / (2 * d * Lam + Lam * dx)
