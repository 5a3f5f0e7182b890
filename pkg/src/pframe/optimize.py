"""Minimization of the p-frame potential over ``N`` points of ``S^{d-1}``.

Restarts run as a batch: every restart owns its own random stream and its own
line-search state, and all arithmetic is row-wise, so the result for a given
restart does not depend on how restarts are grouped or threaded.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, fields
from typing import Optional, Sequence

import numpy as np
from scipy.optimize import minimize_scalar

from .bounds import phase_p0
from .certify import (
    OPTIMIZER_TOL,
    CertificateReport,
    is_equiangular,
    is_equiangular_funtf,
    is_funtf,
)
from .potentials import (
    abs_pow,
    fp,
    offdiag_gradient,
    offdiag_potential,
    tangent_projection,
)
from .sphere import Configuration, gram

ARMIJO = 1e-4
SHRINK = 0.5
MAX_BACKTRACKS = 60
SNAP_TOL = 0.05


def default_eps_schedule(p: float) -> tuple:
    if p < 1:
        return (1e-2, 1e-3, 1e-4, 1e-8)
    if p < 2:
        return (1e-2, 1e-3, 1e-4, 0.0)
    return (0.0,)


@dataclass
class OptimizerConfig:
    d: int
    N: int
    p: float
    restarts: int = 64
    max_iters: int = 5000
    step_init: float = 0.1
    tol_grad: float = 1e-7
    seed: int = 0
    eps_schedule: Optional[Sequence[float]] = None

    def __post_init__(self):
        if self.d < 1 or self.N < 1:
            raise ValueError("d and N must be positive")
        if not (self.p > 0 and math.isfinite(self.p)):
            raise ValueError("p must be finite and positive")
        if self.restarts < 1:
            raise ValueError("restarts must be at least 1")
        if not self.tol_grad > 0:
            raise ValueError("tol_grad must be positive")
        if not self.step_init > 0:
            raise ValueError("step_init must be positive")
        if self.eps_schedule is None:
            self.eps_schedule = default_eps_schedule(self.p)
        sched = tuple(float(e) for e in self.eps_schedule)
        if not sched or any(b >= a for a, b in zip(sched, sched[1:])) or sched[-1] < 0:
            raise ValueError("eps_schedule must be strictly decreasing and non-negative")
        if self.p < 1 and sched[-1] == 0.0:
            raise ValueError("p < 1 needs a positive final smoothing level")
        self.eps_schedule = sched

    @property
    def final_eps(self) -> float:
        return self.eps_schedule[-1]

    @classmethod
    def from_dict(cls, data: dict) -> "OptimizerConfig":
        names = {f.name for f in fields(cls)}
        unknown = set(data) - names
        if unknown:
            raise ValueError(f"unknown optimizer options: {sorted(unknown)}")
        return cls(**data)

    def to_dict(self) -> dict:
        out = {f.name: getattr(self, f.name) for f in fields(self)}
        out["eps_schedule"] = list(out["eps_schedule"])
        return out


@dataclass
class OptResult:
    best: Configuration
    p: float
    value: float
    grad_norm: float
    restart_index: int
    iterations: int
    converged: bool
    certificates: list = field(default_factory=list)
    restart_values: list = field(default_factory=list)
    rounded: bool = False

    def gram(self):
        return gram(self.best)

    def to_dict(self) -> dict:
        return {
            "d": self.best.dim,
            "N": self.best.n,
            "p": self.p,
            "value": self.value,
            "grad_norm": self.grad_norm,
            "restart_index": self.restart_index,
            "iterations": self.iterations,
            "converged": self.converged,
            "rounded": self.rounded,
            "points": self.best.points.tolist(),
            "certificates": [c.to_dict() for c in self.certificates],
        }


def _normalize(x):
    return x / np.linalg.norm(x, axis=-1, keepdims=True)


def initial_configuration(d: int, n: int, seed: int, restart: int) -> np.ndarray:
    """Uniform random points; the stream depends only on ``(seed, restart)``."""
    rng = np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=(int(restart),)))
    return _normalize(rng.standard_normal((n, d)))


def descend(x, p, eps, max_iters, tol_grad, step_init):
    """Projected gradient descent with Armijo backtracking, batched over restarts.

    ``x`` has shape ``(R, N, d)``. Each step moves along the tangent part of
    the gradient and renormalizes the points. Returns the final points and
    the number of iterations each restart used.
    """
    x = np.array(x, dtype=float)
    r = x.shape[0]
    f = offdiag_potential(x, p, eps)
    step = np.full(r, float(step_init))
    active = np.ones(r, dtype=bool)
    iters = np.zeros(r, dtype=int)
    flat = np.zeros(r, dtype=int)
    for _ in range(max_iters):
        idx = np.flatnonzero(active)
        if idx.size == 0:
            break
        g = tangent_projection(x[idx], offdiag_gradient(x[idx], p, eps))
        gn2 = np.sum(g * g, axis=(1, 2))
        done = np.sqrt(gn2) <= tol_grad
        active[idx[done]] = False
        keep = ~done
        idx, g, gn2 = idx[keep], g[keep], gn2[keep]
        if idx.size == 0:
            break
        alpha = step[idx].copy()
        pending = np.ones(idx.size, dtype=bool)
        for _ in range(MAX_BACKTRACKS):
            sub = np.flatnonzero(pending)
            trial = _normalize(x[idx[sub]] - alpha[sub, None, None] * g[sub])
            ft = offdiag_potential(trial, p, eps)
            ok = ft <= f[idx[sub]] - ARMIJO * alpha[sub] * gn2[sub]
            acc = sub[ok]
            rows = idx[acc]
            decrease = f[rows] - ft[ok]
            tiny = decrease <= 1e-15 * np.maximum(1.0, np.abs(f[rows]))
            flat[rows] = np.where(tiny, flat[rows] + 1, 0)
            x[rows] = trial[ok]
            f[rows] = ft[ok]
            step[rows] = np.minimum(2.0 * alpha[acc], 1e3)
            iters[rows] += 1
            pending[acc] = False
            alpha[sub[~ok]] *= SHRINK
            if not pending.any():
                break
        # line search exhausted: no descent available at this precision
        active[idx[pending]] = False
        active[flat >= 50] = False
    return x, iters


def round_to_orthogonal_structure(x, tol: float = SNAP_TOL):
    """Candidate with every point replaced by a signed coordinate axis.

    Points are grouped by near-parallelism (``|<x_i, x_j>| > 1 - tol``). If there
    are at most ``d`` groups and points of different groups are nearly
    orthogonal, group ``c`` is sent to ``e_c``. The potential is rotation
    invariant, so this is the exactly orthogonal configuration closest in
    structure. Returns ``None`` when the structure is absent.
    """
    n, d = x.shape
    g = np.abs(np.clip(x @ x.T, -1.0, 1.0))
    label = -np.ones(n, dtype=int)
    reps = []
    for i in range(n):
        for c, j in enumerate(reps):
            if g[i, j] > 1.0 - tol:
                label[i] = c
                break
        else:
            label[i] = len(reps)
            reps.append(i)
    if len(reps) > d:
        return None
    same = label[:, None] == label[None, :]
    if np.any(g[same] <= 1.0 - tol) or np.any(g[~same] >= tol):
        return None
    out = np.zeros((n, d))
    signs = np.sign(x @ x[reps].T)[np.arange(n), label]
    out[np.arange(n), label] = np.where(signs == 0, 1.0, signs)
    return out


def _true_potential(x, p):
    """``FP_p`` of raw unit rows (no renormalization), diagonal included."""
    n = x.shape[-2]
    return n + offdiag_potential(x, p, 0.0)


def _run_batch(config: OptimizerConfig, restarts: Sequence[int]):
    x = np.stack([initial_configuration(config.d, config.N, config.seed, r) for r in restarts])
    total = np.zeros(len(restarts), dtype=int)
    for eps in config.eps_schedule:
        x, it = descend(x, config.p, eps, config.max_iters, config.tol_grad, config.step_init)
        total += it
    values = np.asarray(_true_potential(x, config.p), dtype=float)
    rounded = np.zeros(len(restarts), dtype=bool)
    for k in range(len(restarts)):
        cand = round_to_orthogonal_structure(x[k])
        if cand is None:
            continue
        v = float(_true_potential(cand, config.p))
        # slack absorbs rounding noise in the unrounded value
        if v <= values[k] + 1e-12 * max(1.0, values[k]):
            x[k], values[k], rounded[k] = cand, v, True
    return x, values, total, rounded


def _chunks(n, parts):
    parts = max(1, min(parts, n))
    bounds = np.linspace(0, n, parts + 1).astype(int)
    return [list(range(a, b)) for a, b in zip(bounds[:-1], bounds[1:]) if b > a]


def projected_gradient_norm(cfg: Configuration, p: float, eps: float) -> float:
    g = offdiag_gradient(cfg.points, p, eps)
    return float(np.linalg.norm(tangent_projection(cfg.points, g)))


def certificates_for(cfg: Configuration, tol: float = OPTIMIZER_TOL) -> list[CertificateReport]:
    out = [is_funtf(cfg, tol)]
    if cfg.n >= 2:
        eq = is_equiangular(cfg, tol)
        out.append(eq)
        if cfg.n >= cfg.dim:
            out.append(is_equiangular_funtf(cfg, tol))
    return out


def minimize_fp(config: OptimizerConfig, threads: int = 1) -> OptResult:
    """Minimize ``FP_{p,N}`` over ``(S^{d-1})^N`` with random restarts.

    Each restart descends through the smoothing levels of ``eps_schedule``;
    its end point is then compared with the exactly orthogonal configuration
    of the same structure (when there is one) and the lower of the two is
    kept. The best restart wins, ties going to the lowest index.
    """
    chunks = _chunks(config.restarts, threads)
    if len(chunks) == 1:
        parts = [_run_batch(config, chunks[0])]
    else:
        with ThreadPoolExecutor(max_workers=len(chunks)) as pool:
            parts = list(pool.map(lambda c: _run_batch(config, c), chunks))
    x = np.concatenate([p[0] for p in parts])
    values = np.concatenate([p[1] for p in parts])
    iters = np.concatenate([p[2] for p in parts])
    rounded = np.concatenate([p[3] for p in parts])
    best = int(np.argmin(values))
    cfg = Configuration(x[best])
    value = fp(cfg, config.p).value
    eps = config.final_eps
    try:
        gnorm = projected_gradient_norm(cfg, config.p, eps)
    except ValueError:
        gnorm = float("nan")
    return OptResult(
        best=cfg,
        p=float(config.p),
        value=value,
        grad_norm=gnorm,
        restart_index=best,
        iterations=int(iters[best]),
        converged=bool(gnorm <= config.tol_grad),
        certificates=certificates_for(cfg),
        restart_values=[float(v) for v in values],
        rounded=bool(rounded[best]),
    )


def _grid_points(grid):
    """Unit vectors at angles ``k pi / grid`` with exact quarter-turn symmetry."""
    half = grid // 2
    k = np.arange(half)
    a = np.pi * k / grid
    first = np.column_stack([np.cos(a), np.sin(a)])
    first[0] = (1.0, 0.0)
    second = np.column_stack([-first[:, 1], first[:, 0]])
    return np.vstack([first, second])


def _brute_force_indices(n, grid, table):
    # table[m] = |cos(m pi / grid)|^p for m = 0 .. grid-1; angle 0 fixed for point 1
    best_val, best_idx = math.inf, None
    if n == 1:
        return 0.0, ()
    if n == 2:
        vals = table[np.arange(grid)]
        k = int(np.argmin(vals))
        return float(2 * vals[k]), (k,)
    rows, cols = np.triu_indices(grid)
    starts = np.searchsorted(rows, np.arange(grid))
    if n == 3:
        v = table[rows] + table[cols] + table[cols - rows]
        k = int(np.argmin(v))
        return float(2 * v[k]), (int(rows[k]), int(cols[k]))
    if n == 4:
        for k2 in range(grid):
            a, b = rows[starts[k2]:], cols[starts[k2]:]
            v = table[k2] + table[a] + table[b] + table[a - k2] + table[b - k2] + table[b - a]
            j = int(np.argmin(v))
            if v[j] < best_val:
                best_val, best_idx = float(v[j]), (k2, int(a[j]), int(b[j]))
        return 2 * best_val, best_idx
    for k2 in range(grid):
        for k3 in range(k2, grid):
            a, b = rows[starts[k3]:], cols[starts[k3]:]
            v = (table[k2] + table[k3] + table[k3 - k2] + table[a] + table[b]
                 + table[a - k2] + table[b - k2] + table[a - k3] + table[b - k3] + table[b - a])
            j = int(np.argmin(v))
            if v[j] < best_val:
                best_val, best_idx = float(v[j]), (k2, k3, int(a[j]), int(b[j]))
    return 2 * best_val, best_idx


def _angles_potential(angles, p):
    pts = np.column_stack([np.cos(angles), np.sin(angles)])
    return float(pts.shape[0] + offdiag_potential(pts, p, 0.0))


def brute_force_2d(n: int, p: float, grid: int = 720) -> OptResult:
    """Exhaustive minimization on the circle, for checking the optimizer.

    Angles ``0 = t_1 <= t_2 <= ... <= t_N < pi`` on a grid of spacing
    ``pi / grid``, followed by coordinate-wise refinement of the best cell.
    """
    if n > 5:
        raise ValueError("oracle limited to desk scale (N <= 5)")
    if n < 1:
        raise ValueError("need at least one point")
    if grid < 360 or grid % 2:
        raise ValueError("grid must be an even number >= 360")
    pts = _grid_points(grid)
    table = abs_pow(pts @ pts[0], p)
    table[0] = 1.0
    _, idx = _brute_force_indices(n, grid, table)
    idx = (0,) + tuple(idx)
    grid_cfg = Configuration(pts[list(idx)])
    grid_val = fp(grid_cfg, p).value

    angles = np.pi * np.array(idx, dtype=float) / grid
    h = np.pi / grid
    cur = _angles_potential(angles, p)
    for _ in range(200):
        before = cur
        for i in range(1, n):
            def obj(a, i=i):
                trial = angles.copy()
                trial[i] = a
                return _angles_potential(trial, p)
            res = minimize_scalar(obj, bounds=(angles[i] - h, angles[i] + h), method="bounded",
                                  options={"xatol": 1e-10})
            if res.fun < cur:
                angles[i], cur = res.x, float(res.fun)
        if before - cur <= 1e-10:
            break
    refined = Configuration.from_angles(angles)
    refined_val = fp(refined, p).value
    best_cfg, best_val = (refined, refined_val) if refined_val < grid_val else (grid_cfg, grid_val)
    try:
        gnorm = projected_gradient_norm(best_cfg, p, 0.0)
    except ValueError:
        gnorm = float("nan")
    return OptResult(
        best=best_cfg, p=float(p), value=best_val, grad_norm=gnorm, restart_index=0,
        iterations=0, converged=True, certificates=certificates_for(best_cfg),
    )


def figure1_closed_form(p: float) -> float:
    """Minimum of ``FP_{p,3}`` on the circle: ``min(5, 6/2^p + 3)``."""
    return min(5.0, 6.0 / 2.0 ** p + 3.0)


@dataclass(frozen=True)
class Figure1Row:
    p: float
    closed_form: float
    optimized: float


def figure1_curve(p_grid, restarts: int = 64, seed: int = 0, threads: int = 1) -> list[Figure1Row]:
    """Closed-form and optimized minima of ``FP_{p,3}`` for three points in ``R^2``."""
    rows = []
    for p in p_grid:
        p = float(p)
        if not 0 < p <= 10:
            raise ValueError("figure 1 grid lives in (0, 10]")
        res = minimize_fp(OptimizerConfig(d=2, N=3, p=p, restarts=restarts, seed=seed), threads)
        rows.append(Figure1Row(p, figure1_closed_form(p), res.value))
    return rows


def figure1_grid(step: float = 0.05, stop: float = 10.0) -> np.ndarray:
    n = int(round(stop / step))
    return np.round(step * np.arange(1, n + 1), 10)


def locate_kink(lo: float = 1.0, hi: float = 2.0, width: float = 1e-3,
                restarts: int = 32, seed: int = 0, threshold: float = 1e-7) -> float:
    """Bisect for the exponent where the optimized ``FP_{p,3}`` leaves the value 5."""
    def below(p):
        res = minimize_fp(OptimizerConfig(d=2, N=3, p=p, restarts=restarts, seed=seed))
        return res.value < 5.0 - threshold

    if below(lo) or not below(hi):
        raise ValueError("kink not bracketed")
    while hi - lo > width:
        mid = 0.5 * (lo + hi)
        if below(mid):
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def conjecture_evidence(d: int, ps, restarts: int = 64, seed: int = 0, threads: int = 1) -> list[dict]:
    """Best potentials found for ``N = d + 1`` against the conjectured ``N + 2``.

    This is numerical evidence for an unproven statement, not a proof.
    """
    out = []
    p0 = phase_p0(d).value
    for p in ps:
        res = minimize_fp(OptimizerConfig(d=d, N=d + 1, p=float(p), restarts=restarts, seed=seed),
                          threads)
        out.append({
            "d": d, "N": d + 1, "p": float(p), "best_found": res.value,
            "conjectured_minimum": float(d + 3) if p <= p0 else None,
            "label": "conjectural evidence",
        })
    return out
