"""p-frame potentials, coherence, size measures and the p-frame force."""
from __future__ import annotations

from typing import NamedTuple

import numpy as np

from .sphere import Configuration, gram

_TINY = 1e-300


class PotentialValue(NamedTuple):
    p: float
    value: float


def abs_pow(t, p):
    """``|t|**p`` elementwise, with ``|t| < 1e-300`` mapped to exactly 0."""
    a = np.abs(np.asarray(t, dtype=float))
    out = np.zeros_like(a)
    mask = a >= _TINY
    out[mask] = np.exp(p * np.log(a[mask]))
    return out


def smoothed_pow(t, p, eps):
    """``(t^2 + eps^2)^(p/2)``, which is ``|t|^p`` when ``eps == 0``."""
    if eps == 0.0:
        return abs_pow(t, p)
    t = np.asarray(t, dtype=float)
    return np.exp(0.5 * p * np.log(t * t + eps * eps))


def smoothed_pow_deriv(t, p, eps):
    """Derivative of :func:`smoothed_pow` in ``t``.

    For ``eps == 0`` the value at ``t == 0`` is taken as 0, which is the
    derivative for ``p > 1`` and the minimal-norm subgradient for ``p == 1``.
    """
    t = np.asarray(t, dtype=float)
    if eps == 0.0:
        a = np.abs(t)
        out = np.zeros_like(a)
        mask = a >= _TINY
        out[mask] = p * np.sign(t[mask]) * np.exp((p - 1.0) * np.log(a[mask]))
        return out
    return p * t * np.exp((0.5 * p - 1.0) * np.log(t * t + eps * eps))


def _check_p(p):
    if not np.isfinite(p) or p <= 0:
        raise ValueError(f"p must be finite and positive, got {p}")


def fp(cfg: Configuration, p: float) -> PotentialValue:
    """Sum of ``|<x_i, x_j>|^p`` over all ``N^2`` ordered pairs."""
    _check_p(p)
    return PotentialValue(float(p), float(np.sum(abs_pow(gram(cfg), p))))


def coherence(cfg: Configuration) -> PotentialValue:
    """Largest off-diagonal ``|<x_i, x_j>|`` (the ``p = inf`` potential)."""
    if cfg.n < 2:
        raise ValueError("coherence undefined for a single point")
    g = np.abs(gram(cfg))
    np.fill_diagonal(g, 0.0)
    return PotentialValue(float("inf"), float(g.max()))


def size_measure(cfg: Configuration, p: float) -> float:
    """``g_p = FP_p^(1/p)``."""
    return fp(cfg, p).value ** (1.0 / p)


def size_measure_raw(points, p: float) -> float:
    """``g_p`` evaluated on un-normalized rows, ``(sum |<z_i, z_j>|^p)^(1/p)``.

    Positively homogeneous of degree one in the Gram matrix, hence of degree
    two in the rows: ``size_measure_raw(s * z) == s**2 * size_measure_raw(z)``.
    """
    _check_p(p)
    z = np.asarray(points, dtype=float)
    return float(np.sum(abs_pow(z @ z.T, p)) ** (1.0 / p))


def _frame_force_profile(s, p):
    # f_p(||a - b||) written through s = 1 - ||a - b||^2 / 2
    if s == 0.0:
        return 0.0
    return p * np.sign(s) * abs(s) ** (p - 1.0)


def pframe_force(a, b, p: float) -> np.ndarray:
    """Central force ``f_p(||a - b||) (a - b)`` between two unit vectors.

    The pair potential ``|<a, b>|^p = |1 - ||a - b||^2 / 2|^p`` has gradient
    ``-F_p`` in ``a`` with ``b`` held fixed.
    """
    if not p > 1:
        raise ValueError("the p-frame force is defined for p > 1")
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise ValueError("dimension mismatch")
    diff = a - b
    # same as 1 - ||a - b||^2 / 2, without cancellation near orthogonality
    s = float(a @ b + 0.5 * (2.0 - a @ a - b @ b))
    return _frame_force_profile(s, p) * diff


def pair_potential_by_distance(a, b, p: float) -> float:
    """``|1 - ||a - b||^2 / 2|^p``; equals ``|<a, b>|^p`` on the sphere."""
    diff = np.asarray(a, dtype=float) - np.asarray(b, dtype=float)
    return float(abs(1.0 - 0.5 * diff @ diff) ** p)


def offdiag_potential(points, p: float, eps: float = 0.0):
    """Smoothed off-diagonal potential of raw rows; batched over leading axes.

    ``points`` has shape ``(..., N, d)``; rows are used as given.
    """
    x = np.asarray(points, dtype=float)
    g = np.clip(np.einsum("...id,...jd->...ij", x, x), -1.0, 1.0)
    phi = smoothed_pow(g, p, eps)
    n = x.shape[-2]
    idx = np.arange(n)
    phi[..., idx, idx] = 0.0
    return phi.sum(axis=(-2, -1))


def offdiag_gradient(points, p: float, eps: float = 0.0):
    """Euclidean gradient of :func:`offdiag_potential`; batched like it."""
    x = np.asarray(points, dtype=float)
    g = np.clip(np.einsum("...id,...jd->...ij", x, x), -1.0, 1.0)
    n = x.shape[-2]
    idx = np.arange(n)
    if eps == 0.0 and p < 1.0:
        off = np.abs(g)
        off[..., idx, idx] = 1.0
        if np.any(off < _TINY):
            raise ValueError("singular gradient; supply eps")
    dphi = smoothed_pow_deriv(g, p, eps)
    dphi[..., idx, idx] = 0.0
    return 2.0 * np.einsum("...ij,...jd->...id", dphi, x)


def fp_gradient(cfg: Configuration, p: float, eps: float = 0.0) -> np.ndarray:
    """Gradient of the potential in each point, as an ``(N, d)`` array.

    Row ``i`` is ``2 sum_{j != i} phi'(<x_i, x_j>) x_j`` with
    ``phi(t) = (t^2 + eps^2)^(p/2)``. The diagonal is left out; it is the
    constant ``N`` on the sphere. ``eps > 0`` is required for ``p < 1`` when an
    inner product vanishes.
    """
    _check_p(p)
    if eps < 0:
        raise ValueError("eps must be non-negative")
    return offdiag_gradient(cfg.points, p, eps)


def tangent_projection(points, grad):
    """Remove the radial part of each row of ``grad``; batched."""
    x = np.asarray(points, dtype=float)
    radial = np.sum(grad * x, axis=-1, keepdims=True)
    return grad - radial * x
