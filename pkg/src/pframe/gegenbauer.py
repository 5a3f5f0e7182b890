"""Gegenbauer polynomials and the expansion of ``t^p`` used for even-p bounds.

For ``d = 2`` the index ``alpha = 0`` makes the usual normalization vanish; we
use the Chebyshev polynomials ``T_n`` there, which keep orthogonality with
respect to ``(1 - t^2)^(-1/2)`` and the positive-kernel property on the circle.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import roots_jacobi

from .bounds import double_factorial_ratio


@dataclass(frozen=True)
class GegenbauerExpansion:
    alpha: float
    degree: int
    coeffs: np.ndarray

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        return sum(c * gegenbauer_eval(self.alpha, k, t) for k, c in enumerate(self.coeffs))

    @property
    def lambda0(self) -> float:
        return float(self.coeffs[0])


def gegenbauer_eval(alpha: float, n: int, t):
    """``C_n^alpha(t)`` by the three-term recurrence (``T_n`` when ``alpha == 0``)."""
    if n < 0:
        raise ValueError("degree must be non-negative")
    t = np.asarray(t, dtype=float)
    prev = np.ones_like(t)
    if n == 0:
        return prev if prev.ndim else float(prev)
    if alpha == 0.0:
        cur = t.copy()
        for m in range(2, n + 1):
            prev, cur = cur, 2.0 * t * cur - prev
    else:
        cur = 2.0 * alpha * t
        for m in range(2, n + 1):
            prev, cur = cur, (2.0 * t * (m + alpha - 1.0) * cur - (m + 2.0 * alpha - 2.0) * prev) / m
    return cur if cur.ndim else float(cur)


def _quadrature(alpha, order):
    a = alpha - 0.5
    return roots_jacobi(order, a, a)


def expand_power(d: int, p: int) -> GegenbauerExpansion:
    """Coefficients ``lambda_k`` with ``t^p = sum_k lambda_k C_k^alpha(t)``.

    Computed from weighted inner products with Gauss-Jacobi quadrature, which
    is exact for these polynomial integrands; ``lambda_0`` is checked against
    ``(p-1)!! / (d (d+2) ... (d+p-2))``.
    """
    if d < 2:
        raise ValueError("expansion needs d >= 2")
    if float(p) != int(p) or int(p) % 2 or int(p) < 0:
        raise ValueError("expand_power requires an even integer p")
    p = int(p)
    alpha = (d - 2) / 2.0
    nodes, weights = _quadrature(alpha, 2 * p + 16)
    tp = nodes ** p
    coeffs = np.zeros(p + 1)
    for k in range(0, p + 1, 2):
        ck = gegenbauer_eval(alpha, k, nodes)
        num = math.fsum(weights * tp * ck)
        den = math.fsum(weights * ck * ck)
        coeffs[k] = num / den
    if p > 0:
        closed = float(double_factorial_ratio(d, p))
        if abs(coeffs[0] - closed) > 1e-10:
            raise ArithmeticError(f"lambda_0 mismatch: {coeffs[0]} vs {closed}")
    return GegenbauerExpansion(alpha, p, coeffs)


def kernel_moment(mu, d: int, k: int) -> float:
    """``sum_{i,j} w_i w_j C_k^alpha(<x_i, x_j>)``; non-negative for any measure."""
    alpha = (d - 2) / 2.0
    x = mu.atoms
    g = np.clip(x @ x.T, -1.0, 1.0)
    w = mu.weights
    return float(w @ gegenbauer_eval(alpha, k, g) @ w)


def pfp_via_expansion(mu, d: int, p: int) -> float:
    """Probabilistic potential evaluated through the Gegenbauer expansion."""
    exp = expand_power(d, p)
    terms = [c * kernel_moment(mu, d, k) for k, c in enumerate(exp.coeffs) if c != 0.0]
    return math.fsum(terms)
