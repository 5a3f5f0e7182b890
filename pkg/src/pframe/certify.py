"""Numerical certificates: tight frames, equiangularity, spherical designs, Tyler scatter."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .bounds import equiangular_constant
from .sphere import Configuration, eigendecompose, frame_bounds, frame_operator, gram

DEFAULT_TOL = 1e-8
OPTIMIZER_TOL = 1e-5


@dataclass(frozen=True)
class CertificateReport:
    kind: str
    holds: bool
    residual: float
    tolerance: float
    detail: str = ""
    data: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "holds": self.holds,
            "residual": self.residual,
            "tolerance": self.tolerance,
            "detail": self.detail,
            **({"data": dict(self.data)} if self.data else {}),
        }


def _report(kind, residual, tol, detail="", **data):
    residual = float(residual)
    return CertificateReport(kind, bool(residual <= tol), residual, float(tol), detail, data)


def is_funtf(cfg: Configuration, tol: float = DEFAULT_TOL) -> CertificateReport:
    """Relative distance of the frame operator from ``(N/d) I``."""
    if not tol > 0:
        raise ValueError("tol must be positive")
    s = frame_operator(cfg).matrix
    target = cfg.n / cfg.dim
    res = np.linalg.norm(s - target * np.eye(cfg.dim)) / target
    return _report("funtf", res, tol, f"frame operator vs (N/d) I with N/d = {target:.6g}")


def is_equiangular(cfg: Configuration, tol: float = DEFAULT_TOL) -> CertificateReport:
    """Spread of the off-diagonal ``|<x_i, x_j>|`` around their mean ``c``."""
    if cfg.n < 2:
        raise ValueError("equiangularity needs at least two points")
    g = np.abs(gram(cfg))
    off = g[~np.eye(cfg.n, dtype=bool)]
    c = float(off.mean())
    res = float(np.max(np.abs(off - c)))
    return _report("equiangular", res, tol, f"common |<x_i, x_j>| = {c:.6g}", constant=c)


def is_equiangular_funtf(cfg: Configuration, tol: float = DEFAULT_TOL) -> CertificateReport:
    """Equiangular and tight, with the angle matching ``sqrt((N-d)/(d(N-1)))``."""
    eq = is_equiangular(cfg, tol)
    ft = is_funtf(cfg, tol)
    c = eq.data["constant"]
    if cfg.n >= cfg.dim:
        gap = abs(c - equiangular_constant(cfg.dim, cfg.n))
    else:
        gap = math.inf
    res = max(eq.residual, ft.residual, gap)
    return _report(
        "equiangular_funtf", res, tol,
        f"equiangular residual {eq.residual:.3g}, tightness residual {ft.residual:.3g}, "
        f"constant gap {gap:.3g}",
        constant=c,
    )


def _double_factorial_odd(m: int) -> int:
    # (2a - 1)!! for m = 2a
    out = 1
    for j in range(1, m, 2):
        out *= j
    return out


def sphere_monomial_moment_exact(d: int, exponents) -> Fraction:
    """Exact average of ``x^e`` over the uniform measure on ``S^{d-1}``."""
    e = [int(v) for v in exponents]
    if len(e) != d:
        raise ValueError("need one exponent per coordinate")
    if any(v < 0 for v in e):
        raise ValueError("exponents must be non-negative")
    if any(v % 2 for v in e):
        return Fraction(0)
    num = 1
    for v in e:
        num *= _double_factorial_odd(v)
    den = 1
    for k in range(1, sum(e) // 2 + 1):
        den *= d + 2 * k - 2
    return Fraction(num, den)


def sphere_monomial_moment(d: int, exponents) -> float:
    """Average of the monomial ``x^e`` over the unit sphere (0 if any exponent is odd)."""
    return float(sphere_monomial_moment_exact(d, exponents))


def monomial_exponents(d: int, degree: int):
    """All exponent tuples of total degree exactly ``degree``."""
    for combo in itertools.combinations_with_replacement(range(d), degree):
        e = [0] * d
        for i in combo:
            e[i] += 1
        yield tuple(e)


def is_spherical_design(cfg: Configuration, t: int, tol: float = DEFAULT_TOL) -> CertificateReport:
    """Check that point averages of every monomial of degree ``<= t`` match the sphere's."""
    if t < 1:
        raise ValueError("design strength must be at least 1")
    x = cfg.points
    worst = 0.0
    worst_e = None
    for deg in range(1, t + 1):
        for e in monomial_exponents(cfg.dim, deg):
            avg = float(np.mean(np.prod(x ** np.array(e), axis=1)))
            gap = abs(avg - sphere_monomial_moment(cfg.dim, e))
            if gap > worst:
                worst, worst_e = gap, e
    detail = f"largest moment gap at exponent {worst_e}" if worst_e else "all moments match"
    return _report("spherical_design", worst, tol, detail, strength=t)


def _sym_sqrt(m):
    ed = eigendecompose(m)
    w, v = ed.eigenvalues, ed.eigenvectors
    return (v * np.sqrt(np.clip(w, 0.0, None))) @ v.T


def _check_spd(gamma):
    gamma = np.asarray(gamma, dtype=float)
    if gamma.ndim != 2 or gamma.shape[0] != gamma.shape[1]:
        raise ValueError("gamma must be square")
    if np.linalg.norm(gamma - gamma.T) > 1e-9 * max(1.0, np.linalg.norm(gamma)):
        raise ValueError("gamma is not symmetric positive definite")
    if eigendecompose(gamma).eigenvalues[-1] <= 0:
        raise ValueError("gamma is not symmetric positive definite")
    return 0.5 * (gamma + gamma.T)


def tyler_m_matrix(sample: Configuration, gamma) -> np.ndarray:
    """``(d/N) sum_i G^(1/2) x_i x_i^T G^(1/2) / (x_i^T G x_i)`` for SPD ``G``."""
    gamma = _check_spd(gamma)
    if gamma.shape[0] != sample.dim:
        raise ValueError("dimension mismatch")
    root = _sym_sqrt(gamma)
    y = sample.points @ root
    q = np.einsum("id,de,ie->i", sample.points, gamma, sample.points)
    m = (y / q[:, None]).T @ y
    return (sample.dim / sample.n) * 0.5 * (m + m.T)


@dataclass(frozen=True)
class TylerResult:
    converged: bool
    gamma: np.ndarray
    residual: float
    iterations: int
    message: str = ""

    def whitened(self, sample: Configuration) -> Configuration:
        """The sample mapped by ``G^(1/2)`` and renormalized."""
        return Configuration(sample.points @ _sym_sqrt(self.gamma))


def tyler_fixed_point(sample: Configuration, max_iter: int = 10000, tol: float = 1e-10) -> TylerResult:
    """Solve ``M(G) = I`` by the fixed-point iteration on ``V = G^{-1}``.

    ``V`` is renormalized to trace ``d`` after each step since ``M`` does not
    see the scale of ``G``. Raises ``ValueError`` for a sample that does not
    span; a run that does not reach ``tol`` comes back with ``converged=False``.
    """
    d, n = sample.dim, sample.n
    if frame_bounds(sample).lower <= 1e-12:
        raise ValueError("sample does not span")
    x = sample.points
    v = np.eye(d)
    residual = math.inf
    for it in range(1, max_iter + 1):
        vinv = np.linalg.inv(v)
        q = np.einsum("id,de,ie->i", x, vinv, x)
        v = (d / n) * (x / q[:, None]).T @ x
        v = 0.5 * (v + v.T)
        v *= d / np.trace(v)
        gamma = np.linalg.inv(v)
        gamma = 0.5 * (gamma + gamma.T)
        residual = float(np.linalg.norm(tyler_m_matrix(sample, gamma) - np.eye(d)))
        if residual <= tol:
            return TylerResult(True, gamma, residual, it)
        if not np.all(np.isfinite(v)) or np.linalg.cond(v) > 1e14:
            return TylerResult(False, gamma, residual, it, "scatter estimate degenerates")
    return TylerResult(False, gamma, residual, max_iter, "no convergence within max_iter")
