"""Finitely supported probability measures on the sphere and their p-frame potentials."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy import integrate

from .bounds import double_factorial_ratio
from .optimize import OptimizerConfig, round_to_orthogonal_structure
from .potentials import abs_pow, smoothed_pow, smoothed_pow_deriv, tangent_projection
from .sphere import (
    Configuration,
    FrameOperator,
    NotAFrameError,
    eigendecompose,
)

SUPPORT_WEIGHT = 1e-6


class DiscreteMeasure:
    """Weighted atoms in ``R^d``.

    Atoms of an on-sphere measure must have unit norm (within ``1e-10``);
    pass ``project=True`` to normalize them. Dual measures carry
    ``off_sphere=True`` and skip that check. Weights are non-negative and sum
    to one within ``1e-12``.
    """

    __slots__ = ("_atoms", "_weights", "_off_sphere")

    def __init__(self, atoms, weights=None, off_sphere: bool = False, project: bool = False):
        a = np.array(atoms, dtype=float)
        if a.ndim == 1:
            a = a.reshape(1, -1)
        if a.ndim != 2 or a.shape[0] < 1 or a.shape[1] < 1:
            raise ValueError("atoms need shape (M, d)")
        if not np.all(np.isfinite(a)):
            raise ValueError("atoms must be finite")
        m = a.shape[0]
        w = np.full(m, 1.0 / m) if weights is None else np.array(weights, dtype=float).reshape(-1)
        if w.shape[0] != m:
            raise ValueError("one weight per atom required")
        if np.any(w < 0) or not np.all(np.isfinite(w)):
            raise ValueError("weights must be finite and non-negative")
        if abs(w.sum() - 1.0) > 1e-12:
            raise ValueError(f"weights must sum to 1, got {w.sum()!r}")
        if not off_sphere:
            norms = np.linalg.norm(a, axis=1)
            if project:
                if np.any(norms == 0):
                    raise ValueError("cannot normalize the zero vector")
                a = a / norms[:, None]
            elif np.any(np.abs(norms - 1.0) > 1e-10):
                raise ValueError("atoms of a measure on the sphere must have unit norm")
        a.setflags(write=False)
        w.setflags(write=False)
        self._atoms, self._weights, self._off_sphere = a, w, bool(off_sphere)

    @property
    def atoms(self) -> np.ndarray:
        return self._atoms

    @property
    def weights(self) -> np.ndarray:
        return self._weights

    @property
    def off_sphere(self) -> bool:
        return self._off_sphere

    @property
    def dim(self) -> int:
        return self._atoms.shape[1]

    def __len__(self):
        return self._atoms.shape[0]

    def __repr__(self):
        tag = ", off_sphere" if self._off_sphere else ""
        return f"DiscreteMeasure(M={len(self)}, d={self.dim}{tag})"

    @classmethod
    def counting(cls, cfg: Configuration) -> "DiscreteMeasure":
        """Normalized counting measure ``(1/N) sum_i delta_{x_i}``."""
        return cls(cfg.points)

    def to_dict(self) -> dict:
        return {
            "d": self.dim,
            "atoms": self._atoms.tolist(),
            "weights": self._weights.tolist(),
            "off_sphere": self._off_sphere,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "DiscreteMeasure":
        atoms = data["atoms"]
        m = cls(atoms, data.get("weights"), bool(data.get("off_sphere", False)))
        if "d" in data and int(data["d"]) != m.dim:
            raise ValueError("declared d does not match the atoms")
        return m


def _require_sphere(mu):
    if mu.off_sphere:
        raise ValueError("operation needs a measure on the sphere")


def pfp(mu: DiscreteMeasure, p: float) -> float:
    """``sum_{i,j} w_i w_j |<x_i, x_j>|^p``."""
    if not (p > 0 and math.isfinite(p)):
        raise ValueError("p must be finite and positive")
    _require_sphere(mu)
    x, w = mu.atoms, mu.weights
    k = abs_pow(np.clip(x @ x.T, -1.0, 1.0), p)
    np.fill_diagonal(k, 1.0)
    return float(w @ k @ w)


def second_moments(mu: DiscreteMeasure) -> FrameOperator:
    """``sum_i w_i x_i x_i^T``."""
    x, w = mu.atoms, mu.weights
    s = (x * w[:, None]).T @ x
    return FrameOperator(0.5 * (s + s.T), 1.0)


def symmetrize(mu: DiscreteMeasure) -> DiscreteMeasure:
    """``(mu(E) + mu(-E)) / 2`` as a measure on twice as many atoms."""
    return DiscreteMeasure(np.vstack([mu.atoms, -mu.atoms]),
                           np.concatenate([mu.weights, mu.weights]) / 2.0,
                           off_sphere=mu.off_sphere)


def projection_moment(mu: DiscreteMeasure, y, p: float):
    """``P(y) = sum_i w_i |<x_i, y>|^p``; ``y`` may be a stack of rows."""
    y = np.asarray(y, dtype=float)
    return abs_pow(np.clip(y @ mu.atoms.T, -1.0, 1.0), p) @ mu.weights


def _projection_moment_grad(mu, y, p):
    t = np.clip(y @ mu.atoms.T, -1.0, 1.0)
    return (smoothed_pow_deriv(t, p, 0.0) * mu.weights) @ mu.atoms


def sphere_samples(d: int, n: int, seed: int = 0) -> np.ndarray:
    """Deterministic, roughly even sample of directions (half sphere for d = 2)."""
    if d == 1:
        return np.ones((1, 1))
    if d == 2:
        a = np.pi * np.arange(n) / n
        return np.column_stack([np.cos(a), np.sin(a)])
    if d == 3:
        i = np.arange(n) + 0.5
        z = 1.0 - 2.0 * i / n
        r = np.sqrt(1.0 - z * z)
        phi = np.pi * (1.0 + 5.0 ** 0.5) * i
        return np.column_stack([r * np.cos(phi), r * np.sin(phi), z])
    rng = np.random.default_rng(seed)
    y = rng.standard_normal((n, d))
    return y / np.linalg.norm(y, axis=1, keepdims=True)


def _local_extremum(mu, y0, p, sign, iters=300):
    """Projected gradient descent on ``sign * P`` from each row of ``y0``."""
    y = np.array(y0, dtype=float)
    f = sign * projection_moment(mu, y, p)
    step = np.full(len(y), 0.1)
    active = np.ones(len(y), dtype=bool)
    for _ in range(iters):
        rows = np.flatnonzero(active)
        if rows.size == 0:
            break
        g = sign * _projection_moment_grad(mu, y[rows], p)
        g = tangent_projection(y[rows], g)
        gn2 = np.sum(g * g, axis=1)
        f_old = f[rows].copy()
        alpha = step[rows].copy()
        pending = gn2 > 1e-30
        for _ in range(40):
            if not pending.any():
                break
            sub = np.flatnonzero(pending)
            trial = y[rows[sub]] - alpha[sub, None] * g[sub]
            trial /= np.linalg.norm(trial, axis=1, keepdims=True)
            ft = sign * projection_moment(mu, trial, p)
            ok = ft <= f[rows[sub]] - 1e-4 * alpha[sub] * gn2[sub]
            acc = sub[ok]
            y[rows[acc]], f[rows[acc]] = trial[ok], ft[ok]
            step[rows[acc]] = 2.0 * alpha[acc]
            pending[acc] = False
            alpha[sub[~ok]] *= 0.5
        # a row is done once a full step gains less than rounding level
        active[rows] = f_old - f[rows] > 1e-15 * np.maximum(1.0, np.abs(f_old))
    return y, sign * f


@dataclass(frozen=True)
class PFrameCheck:
    p: float
    lowerA: float
    upperB: float
    is_pframe: bool
    is_tight: bool
    tol: float
    rank: int
    method: str

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def pframe_check(mu: DiscreteMeasure, p: float, tol: float = 1e-8, seed: int = 0,
                 restarts: int = 32) -> PFrameCheck:
    """Optimal constants ``A <= P(y) <= B`` over unit ``y``.

    Exact eigenvalues for ``p = 2``; otherwise a numerical search (grid warm
    start plus ``restarts`` random starts, refined by projected gradient).
    ``rank`` is the rank of the second moments matrix: full rank is the same
    as being a probabilistic p-frame for every ``p >= 1``.
    """
    if p < 1:
        raise ValueError("pframe_check supports p >= 1 only")
    _require_sphere(mu)
    d = mu.dim
    ed = eigendecompose(second_moments(mu))
    lam = ed.eigenvalues
    rank = int(np.sum(lam > 1e-10 * max(1.0, lam[0])))
    if p == 2:
        lo, hi = float(max(lam[-1], 0.0)), float(lam[0])
        method = "exact"
    else:
        cand = [sphere_samples(d, 3600 if d == 2 else 2000), ed.eigenvectors.T, mu.atoms]
        rng = np.random.default_rng(seed)
        r = rng.standard_normal((restarts, d))
        cand.append(r / np.linalg.norm(r, axis=1, keepdims=True))
        y = np.vstack(cand)
        vals = projection_moment(mu, y, p)
        order = np.argsort(vals, kind="stable")
        k = min(len(y), restarts)
        _, fmin = _local_extremum(mu, y[order[:k]], p, 1.0)
        _, fmax = _local_extremum(mu, y[order[::-1][:k]], p, -1.0)
        lo = float(min(vals.min(), fmin.min()))
        hi = float(max(vals.max(), fmax.max()))
        if rank < d:
            # any null direction of the second moments matrix gives P = 0
            lo = 0.0
        method = "numerical"
    return PFrameCheck(float(p), lo, hi, bool(lo > tol), bool(hi - lo <= tol * hi), float(tol),
                       rank, method)


def _inverse_moments(mu):
    s = second_moments(mu).matrix
    lam = eigendecompose(s).eigenvalues
    if lam[-1] <= 1e-10:
        raise NotAFrameError("not a probabilistic frame")
    return s


def canonical_dual(mu: DiscreteMeasure) -> DiscreteMeasure:
    """Push-forward of ``mu`` under ``S^{-1}``: atoms ``S^{-1} x_i``, same weights."""
    s = _inverse_moments(mu)
    z = np.linalg.solve(s, mu.atoms.T).T
    return DiscreteMeasure(z, mu.weights, off_sphere=True)


def reconstruct_measure(mu: DiscreteMeasure, y) -> np.ndarray:
    """Recover ``y`` from the canonical dual; both reconstruction forms must agree."""
    s = _inverse_moments(mu)
    y = np.asarray(y, dtype=float).reshape(-1)
    if y.shape[0] != mu.dim:
        raise ValueError("dimension mismatch")
    z = np.linalg.solve(s, mu.atoms.T).T
    w = mu.weights
    sz = z @ s
    first = (sz * (w * (z @ y))[:, None]).sum(axis=0)
    second = (z * (w * (sz @ y))[:, None]).sum(axis=0)
    if np.linalg.norm(first - second) > 1e-10 * max(1.0, np.linalg.norm(y)):
        raise ArithmeticError("reconstruction forms disagree")
    return first


def uniform_pfp(d: int, p: float) -> float:
    """``int |<x, y>|^p d sigma(x)`` for the uniform probability measure on ``S^{d-1}``.

    Closed form for even integer ``p``; otherwise adaptive quadrature over
    the polar angle, supported for ``d`` in {2, 3}.
    """
    if not p > 0:
        raise ValueError("p must be positive")
    if float(p).is_integer() and int(p) % 2 == 0:
        return float(double_factorial_ratio(d, int(p)))
    if d not in (2, 3):
        raise ValueError("non-even p is supported for d in {2, 3} only")
    opts = dict(epsabs=1e-14, epsrel=1e-13, limit=200)
    num, err = integrate.quad(lambda t: np.cos(t) ** p * np.sin(t) ** (d - 2), 0.0, np.pi / 2, **opts)
    den = 1.0 if d == 3 else np.pi / 2
    if err > 1e-10:
        raise ArithmeticError("quadrature did not reach 1e-10")
    return num / den


@dataclass
class MeasureOptResult:
    best: DiscreteMeasure
    p: float
    value: float
    restart_index: int
    iterations: int
    converged: bool
    structure: Optional[dict] = None
    restart_values: list = field(default_factory=list)
    rounded: bool = False

    def to_dict(self) -> dict:
        return {
            "p": self.p,
            "value": self.value,
            "restart_index": self.restart_index,
            "iterations": self.iterations,
            "converged": self.converged,
            "rounded": self.rounded,
            "measure": self.best.to_dict(),
            "structure": self.structure,
        }


def _kernel(x, p, eps):
    k = smoothed_pow(np.clip(x @ x.T, -1.0, 1.0), p, eps)
    np.fill_diagonal(k, smoothed_pow(1.0, p, eps))
    return k


def _weight_step(k, w, sweeps=1):
    """Exponentiated-gradient updates of the weights; accepted only on decrease."""
    f = w @ k @ w
    for _ in range(sweeps):
        g = 2.0 * k @ w
        span = np.max(np.abs(g))
        if span == 0:
            break
        eta = 0.5 / span
        for _ in range(30):
            nw = w * np.exp(-eta * (g - g.min()))
            nw /= nw.sum()
            nf = nw @ k @ nw
            if nf <= f:
                w, f = nw, nf
                break
            eta *= 0.5
        else:
            break
    return w, f


def _descend_measure(x, w, p, eps, max_iters, tol):
    n = x.shape[0]
    k = _kernel(x, p, eps)
    f = w @ k @ w
    step = 0.1
    flat = 0
    it = 0
    for it in range(1, max_iters + 1):
        t = np.clip(x @ x.T, -1.0, 1.0)
        dk = smoothed_pow_deriv(t, p, eps)
        np.fill_diagonal(dk, 0.0)
        # direction per unit weight: gradient of P_mu at each atom
        h = tangent_projection(x, dk @ (w[:, None] * x))
        gn2 = 2.0 * float(np.sum(w[:, None] * h * h))
        f_old = f
        if gn2 > 0:
            alpha = step
            for _ in range(50):
                trial = x - alpha * h
                trial /= np.linalg.norm(trial, axis=1, keepdims=True)
                kt = _kernel(trial, p, eps)
                ft = w @ kt @ w
                if ft <= f - 1e-4 * alpha * gn2:
                    x, k, f = trial, kt, ft
                    step = min(2.0 * alpha, 1e3)
                    break
                alpha *= 0.5
        w, f = _weight_step(k, w)
        g = 2.0 * k @ w
        spread = float(np.sqrt(np.sum(w * (g - w @ g) ** 2)))
        if math.sqrt(gn2) <= tol and spread <= tol:
            break
        if f_old - f <= 1e-15 * max(1.0, f):
            flat += 1
            if flat >= 50:
                break
        else:
            flat = 0
    return x, w, it


def _polish_weights(x, w, p, iters=2000):
    k = _kernel(x, p, 0.0)
    f = w @ k @ w
    for _ in range(iters):
        w2, f2 = _weight_step(k, w)
        if f - f2 <= 1e-17:
            w, f = w2, f2
            break
        w, f = w2, f2
    return w


def _rounded_candidate(x, w, p):
    keep = w >= 1e-8
    cand = round_to_orthogonal_structure(x[keep])
    if cand is None:
        return None
    wk = w[keep] / w[keep].sum()
    return cand, _polish_weights(cand, wk, p)


def minimize_pfp(d: int, m: int, p: float, cfg: Optional[OptimizerConfig] = None) -> MeasureOptResult:
    """Minimize the probabilistic potential over measures with ``m`` atoms.

    Alternates projected gradient steps on the atoms with multiplicative
    weight updates, through the smoothing levels of ``cfg.eps_schedule``. As
    with :func:`pframe.optimize.minimize_fp`, the exactly orthogonal measure
    of the same structure is tried at the end and kept if it is lower.
    """
    if m < d:
        raise ValueError("need at least d atoms")
    if cfg is None:
        cfg = OptimizerConfig(d=d, N=m, p=p)
    values, results = [], []
    for r in range(cfg.restarts):
        rng = np.random.default_rng(np.random.SeedSequence(int(cfg.seed), spawn_key=(r,)))
        x = rng.standard_normal((m, d))
        x /= np.linalg.norm(x, axis=1, keepdims=True)
        w = np.full(m, 1.0 / m)
        total = 0
        for eps in cfg.eps_schedule:
            x, w, it = _descend_measure(x, w, p, eps, cfg.max_iters, cfg.tol_grad)
            total += it
        mu = DiscreteMeasure(x, w / w.sum(), project=True)
        val = pfp(mu, p)
        rounded = False
        cand = _rounded_candidate(x, w, p)
        if cand is not None:
            cmu = DiscreteMeasure(cand[0], cand[1] / cand[1].sum())
            cval = pfp(cmu, p)
            if cval <= val + 1e-12 * max(1.0, val):
                mu, val, rounded = cmu, cval, True
        values.append(val)
        results.append((mu, total, rounded))
    best = int(np.argmin(values))
    mu, total, rounded = results[best]
    report = support_structure(mu, p) if p < 2 else None
    chk = minimizer_support_check(mu, p, tol=1e-6)
    return MeasureOptResult(
        best=mu, p=float(p), value=values[best], restart_index=best, iterations=total,
        converged=bool(chk.constant_on_support and chk.no_lower_direction),
        structure=report, restart_values=[float(v) for v in values], rounded=rounded,
    )


def coalesce(mu: DiscreteMeasure, radius: float = 1e-6) -> DiscreteMeasure:
    """Merge atoms closer than ``radius``, summing their weights."""
    atoms, weights = [], []
    for a, w in zip(mu.atoms, mu.weights):
        for k, b in enumerate(atoms):
            if np.linalg.norm(a - b) < radius:
                weights[k] += w
                break
        else:
            atoms.append(a.copy())
            weights.append(w)
    weights = np.array(weights)
    return DiscreteMeasure(np.array(atoms), weights / weights.sum(), off_sphere=mu.off_sphere,
                           project=not mu.off_sphere)


def support_structure(mu: DiscreteMeasure, p: float, tol: float = 1e-3) -> dict:
    """Does the support sit on ``{+-v_1, ..., +-v_d}`` for an orthonormal basis?

    Atoms below weight ``1e-6`` are not counted as support. Reports the
    largest distance of a support atom to the nearest ``+-v_c`` and the
    weight carried by each axis ``{v_c, -v_c}``, which should be ``1/d``.
    """
    mu = coalesce(mu)
    d = mu.dim
    keep = mu.weights > SUPPORT_WEIGHT
    x, w = mu.atoms[keep], mu.weights[keep]
    g = np.abs(np.clip(x @ x.T, -1.0, 1.0))
    label = -np.ones(len(x), dtype=int)
    reps = []
    for i in range(len(x)):
        for c, j in enumerate(reps):
            if g[i, j] > 1.0 - tol:
                label[i] = c
                break
        else:
            label[i] = len(reps)
            reps.append(i)
    out = {"axes": len(reps), "support_size": int(len(x))}
    if len(reps) != d:
        out.update(onb_support=False, paired_weights=False, max_atom_distance=None, axis_weights=None)
        return out
    # orthonormal basis nearest to the axis representatives (polar factor)
    reps_mat = x[reps]
    u, _, vt = np.linalg.svd(reps_mat)
    basis = u @ vt
    dots = x @ basis.T
    dist = np.sqrt(np.maximum(2.0 - 2.0 * np.abs(dots[np.arange(len(x)), label]), 0.0))
    axis_w = np.array([w[label == c].sum() for c in range(d)])
    max_dist = float(dist.max())
    ortho = float(np.max(np.abs(reps_mat @ reps_mat.T - np.diag(np.diag(reps_mat @ reps_mat.T)))))
    out.update(
        onb_support=bool(max_dist <= tol and ortho <= tol),
        paired_weights=bool(np.all(np.abs(axis_w - 1.0 / d) <= tol)),
        max_atom_distance=max_dist,
        axis_weights=axis_w.tolist(),
    )
    return out


@dataclass(frozen=True)
class SupportReport:
    support_value: float
    max_deviation: float
    min_gap: float
    rank: int
    constant_on_support: bool
    no_lower_direction: bool
    complete: bool

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def minimizer_support_check(mu: DiscreteMeasure, p: float, tol: float = 1e-8,
                            samples: int = 3600) -> SupportReport:
    """Necessary conditions for a minimizer of the probabilistic potential.

    ``P(y) = sum_i w_i |<x_i, y>|^p`` must be constant on the support, must not
    drop below that constant anywhere on the sphere, and the support must
    span ``R^d``.
    """
    _require_sphere(mu)
    d = mu.dim
    keep = mu.weights > SUPPORT_WEIGHT
    x = mu.atoms[keep]
    on = projection_moment(mu, x, p)
    common = float(mu.weights[keep] @ on / mu.weights[keep].sum())
    dev = float(np.max(np.abs(on - common)))
    y = sphere_samples(d, samples)
    vals = projection_moment(mu, y, p)
    order = np.argsort(vals, kind="stable")[:32]
    _, fmin = _local_extremum(mu, y[order], p, 1.0)
    low = float(min(vals.min(), fmin.min()))
    rank = int(np.linalg.matrix_rank(x, tol=1e-8)) if len(x) else 0
    return SupportReport(common, dev, low - common, rank, dev <= tol, low - common >= -tol, rank == d)
