"""Unit vectors, point configurations on the sphere and their frame operators.

Points are stored row-wise: a configuration of ``N`` points in ``R^d`` is an
``(N, d)`` array whose rows have unit Euclidean norm.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

SYMMETRY_TOL = 1e-9
DEGENERACY_TOL = 1e-9


class NotAFrameError(ValueError):
    """Raised when an operation needs an invertible frame operator."""


def unit_vector(coords) -> np.ndarray:
    """Return ``coords`` scaled to unit length.

    A zero vector is rejected rather than silently mapped somewhere.
    """
    v = np.array(coords, dtype=float).reshape(-1)
    if v.size < 1:
        raise ValueError("unit vector needs at least one coordinate")
    if not np.all(np.isfinite(v)):
        raise ValueError("unit vector coordinates must be finite")
    nrm = np.linalg.norm(v)
    if nrm == 0.0:
        raise ValueError("cannot normalize the zero vector")
    v = v / nrm
    v.setflags(write=False)
    return v


class Configuration:
    """``N`` unit vectors in ``R^d``.

    Parameters
    ----------
    points : array_like, shape (N, d)
        Rows are normalized on construction. Zero rows raise ``ValueError``.
    """

    __slots__ = ("_points",)

    def __init__(self, points):
        pts = np.array(points, dtype=float)
        if pts.ndim == 1:
            pts = pts.reshape(1, -1)
        if pts.ndim != 2 or pts.shape[0] < 1 or pts.shape[1] < 1:
            raise ValueError("configuration needs shape (N, d) with N, d >= 1")
        if not np.all(np.isfinite(pts)):
            raise ValueError("configuration coordinates must be finite")
        norms = np.linalg.norm(pts, axis=1)
        if np.any(norms == 0.0):
            raise ValueError("cannot normalize the zero vector")
        pts = pts / norms[:, None]
        pts.setflags(write=False)
        self._points = pts

    @property
    def points(self) -> np.ndarray:
        return self._points

    @property
    def dim(self) -> int:
        return self._points.shape[1]

    @property
    def n(self) -> int:
        return self._points.shape[0]

    def __len__(self):
        return self.n

    def __iter__(self):
        return iter(self._points)

    def __repr__(self):
        return f"Configuration(N={self.n}, d={self.dim})"

    def transform(self, q) -> "Configuration":
        """Apply the linear map ``q`` to every point (then renormalize)."""
        return Configuration(self._points @ np.asarray(q, dtype=float).T)

    def with_antipodes(self) -> "Configuration":
        return Configuration(np.vstack([self._points, -self._points]))

    @classmethod
    def from_angles(cls, angles) -> "Configuration":
        """Points ``(cos a, sin a)`` on the unit circle."""
        a = np.asarray(angles, dtype=float)
        return cls(np.column_stack([np.cos(a), np.sin(a)]))


def orthonormal_basis(d: int) -> Configuration:
    return Configuration(np.eye(d))


def regular_polygon(n: int) -> Configuration:
    """The ``n``-th roots of unity as points of the unit circle."""
    return Configuration.from_angles(2.0 * np.pi * np.arange(n) / n)


def mercedes_frame() -> Configuration:
    """Three unit vectors at 0, 120 and 240 degrees."""
    return regular_polygon(3)


def simplex_frame(d: int) -> Configuration:
    """Vertices of the regular simplex: ``d + 1`` equiangular unit vectors in ``R^d``.

    Built by centering the standard basis of ``R^{d+1}`` and expressing it in an
    orthonormal basis of the hyperplane orthogonal to the all-ones vector.
    """
    e = np.eye(d + 1) - 1.0 / (d + 1)
    # rows of e span a d-dimensional subspace; project onto its basis
    _, _, vt = np.linalg.svd(e)
    return Configuration(e @ vt[:d].T)


def gram(cfg: Configuration) -> np.ndarray:
    """Matrix of pairwise inner products, clamped to ``[-1, 1]`` with unit diagonal."""
    x = cfg.points
    g = np.clip(x @ x.T, -1.0, 1.0)
    g = 0.5 * (g + g.T)
    np.fill_diagonal(g, 1.0)
    return g


@dataclass(frozen=True)
class FrameOperator:
    """``sum_i w_i x_i x_i^T`` together with the total mass ``sum_i w_i``."""

    matrix: np.ndarray
    weightsum: float

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


def frame_operator(cfg: Configuration) -> FrameOperator:
    x = cfg.points
    s = x.T @ x
    return FrameOperator(0.5 * (s + s.T), float(cfg.n))


class EigenDecomposition(NamedTuple):
    """Eigenvalues in descending order; eigenvectors are the columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


def _jacobi_rotation(a, p, q):
    # symmetric 2x2 Schur decomposition (Golub & Van Loan, Alg. 8.4.1)
    apq = a[p, q]
    tau = (a[q, q] - a[p, p]) / (2.0 * apq)
    if abs(tau) > 1e150:
        # t ~ 1/(2 tau) without squaring tau
        t = 0.5 / tau
    elif tau >= 0:
        t = 1.0 / (tau + np.sqrt(1.0 + tau * tau))
    else:
        t = -1.0 / (-tau + np.sqrt(1.0 + tau * tau))
    c = 1.0 / np.sqrt(1.0 + t * t)
    return c, t * c


def jacobi_eigh(matrix, rtol: float = 1e-14, max_sweeps: int = 100):
    """Eigen-decomposition of a symmetric matrix by cyclic Jacobi sweeps.

    Iterates until the off-diagonal Frobenius mass drops below
    ``rtol * ||matrix||_F``. Returns unsorted ``(eigenvalues, eigenvectors)``.
    """
    a = np.array(matrix, dtype=float)
    n = a.shape[0]
    v = np.eye(n)
    total = np.linalg.norm(a)
    if n == 1 or total == 0.0:
        return np.diag(a).copy(), v
    for _ in range(max_sweeps):
        off = np.linalg.norm(a[~np.eye(n, dtype=bool)])
        if off <= rtol * total:
            break
        rotated = False
        for p in range(n - 1):
            for q in range(p + 1, n):
                if a[p, q] == 0.0:
                    continue
                if abs(a[p, q]) <= 1e-18 * np.sqrt(abs(a[p, p] * a[q, q])):
                    # below rounding level of the diagonal
                    a[p, q] = a[q, p] = 0.0
                    continue
                rotated = True
                c, s = _jacobi_rotation(a, p, q)
                ap = a[:, p].copy()
                aq = a[:, q].copy()
                a[:, p] = c * ap - s * aq
                a[:, q] = s * ap + c * aq
                ap = a[p, :].copy()
                aq = a[q, :].copy()
                a[p, :] = c * ap - s * aq
                a[q, :] = s * ap + c * aq
                a[p, q] = a[q, p] = 0.0
                vp = v[:, p].copy()
                vq = v[:, q].copy()
                v[:, p] = c * vp - s * vq
                v[:, q] = s * vp + c * vq
        if not rotated:
            break
    else:
        raise ArithmeticError("Jacobi sweeps did not converge")
    return np.diag(a).copy(), v


def _fix_signs(vectors, tiny=1e-12):
    out = vectors.copy()
    for k in range(out.shape[1]):
        col = out[:, k]
        nz = np.flatnonzero(np.abs(col) > tiny)
        if nz.size and col[nz[0]] < 0:
            out[:, k] = -col
    return out


def eigendecompose(s) -> EigenDecomposition:
    """Descending eigen-decomposition of a symmetric matrix or ``FrameOperator``.

    Each eigenvector's first nonzero component is made positive so results are
    reproducible.
    """
    m = s.matrix if isinstance(s, FrameOperator) else np.asarray(s, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError("eigendecompose needs a square matrix")
    if np.linalg.norm(m - m.T) > SYMMETRY_TOL * max(1.0, np.linalg.norm(m)):
        raise ValueError("matrix is not symmetric")
    w, v = jacobi_eigh(0.5 * (m + m.T))
    order = np.argsort(-w, kind="stable")
    return EigenDecomposition(w[order], _fix_signs(v[:, order]))


class FrameBounds(NamedTuple):
    lower: float
    upper: float

    @property
    def is_frame(self) -> bool:
        return self.lower > 0.0


def _bounds_from_eigenvalues(w) -> FrameBounds:
    lo, hi = float(w[-1]), float(w[0])
    # rounding can push a zero eigenvalue slightly negative
    if lo < 0.0 and lo > -1e-10 * max(1.0, hi):
        lo = 0.0
    if abs(lo) <= 1e-12 * max(1.0, hi):
        lo = 0.0
    return FrameBounds(lo, hi)


def frame_bounds(cfg: Configuration) -> FrameBounds:
    """Optimal frame bounds: the extreme eigenvalues of the frame operator."""
    return _bounds_from_eigenvalues(eigendecompose(frame_operator(cfg)).eigenvalues)


def reconstruct(cfg: Configuration, y) -> np.ndarray:
    """Recover ``y`` from its frame coefficients through the canonical dual frame."""
    y = np.asarray(y, dtype=float).reshape(-1)
    if y.shape[0] != cfg.dim:
        raise ValueError("dimension mismatch")
    if not frame_bounds(cfg).is_frame:
        raise NotAFrameError("not a frame")
    s = frame_operator(cfg).matrix
    dual = np.linalg.solve(s, cfg.points.T).T
    return cfg.points.T @ (dual @ y)


class ProcrustesMean(NamedTuple):
    direction: np.ndarray
    eigenvalue: float
    degenerate: bool


def procrustes_direction(cfg: Configuration) -> ProcrustesMean:
    """Top eigenvector of the frame operator and its eigenvalue.

    The eigenvalue equals the optimal upper frame bound, and the direction
    attains it: ``sum_i <x_i, v>^2 = B``. When the top eigenvalue is repeated
    the returned vector is only one of many maximizers; ``degenerate`` says so.
    """
    ed = eigendecompose(frame_operator(cfg))
    w = ed.eigenvalues
    degenerate = len(w) > 1 and (w[0] - w[1]) <= DEGENERACY_TOL * max(1.0, abs(w[0]))
    v = ed.eigenvectors[:, 0].copy()
    v.setflags(write=False)
    return ProcrustesMean(v, float(w[0]), bool(degenerate))
