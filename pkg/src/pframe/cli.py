"""Command-line front end.

Every subcommand writes its artifacts and a ``<command>_manifest.json`` into
``--out``. Exit codes: 0 on success (a run that did not converge is flagged,
not failed), 2 on bad input, 3 when a computed result contradicts a proven
bound or identity.
"""
from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

from . import __version__
from .bounds import (
    applicable_bounds,
    compare_bounds,
    double_factorial_ratio,
    dplus1_min,
    phase_p0,
    venkov_bound,
)
from .certify import (
    is_equiangular,
    is_equiangular_funtf,
    is_funtf,
    is_spherical_design,
    tyler_fixed_point,
)
from .io import (
    InputError,
    RunManifest,
    configuration_from_dict,
    configuration_to_dict,
    measure_from_dict,
    read_json,
    resolve,
    write_csv,
    write_json,
)
from .optimize import OptimizerConfig, figure1_curve, figure1_grid, locate_kink, minimize_fp
from .potentials import coherence, fp, size_measure
from .prob import (
    minimize_pfp,
    minimizer_support_check,
    pfp,
    pframe_check,
    uniform_pfp,
)
from .sphere import frame_bounds, procrustes_direction

BOUND_SLACK = 1e-6


def _p_list(raw) -> list[float]:
    if raw is None:
        raise InputError('missing "p" list')
    if not isinstance(raw, list):
        raw = [raw]
    out = []
    for v in raw:
        try:
            p = float(v)
        except (TypeError, ValueError):
            raise InputError(f"p must be a number, got {v!r}") from None
        if not (p > 0 and math.isfinite(p)):
            raise InputError(f"p must be finite and positive, got {v!r}")
        out.append(p)
    return out


def _load_config(args) -> tuple[dict, Path]:
    if not args.config:
        raise InputError(f"{args.command} needs --config")
    path = Path(args.config)
    data = read_json(path)
    if not isinstance(data, dict):
        raise InputError("config must be a JSON object")
    return data, path.parent


def _manifest(args, summary=None) -> RunManifest:
    return RunManifest(
        command=args.command,
        config_path=str(args.config or ""),
        output_dir=str(args.out),
        seed=int(args.seed if args.seed is not None else 0),
        argv=list(args.argv),
        summary=summary or {},
    )


def _finish(args, manifest, paths):
    for p in paths:
        manifest.add(p)
    manifest.write(args.out)
    for p in paths:
        print(f"wrote {p}")


def cmd_potential(args) -> int:
    data, base = _load_config(args)
    if "points" in data:
        cfg = configuration_from_dict(data)
    else:
        cfg = configuration_from_dict(resolve(data.get("configuration"), base))
    ps = _p_list(args.p if args.p else data.get("p"))
    coh = coherence(cfg).value if cfg.n > 1 else None
    rows = [(p, fp(cfg, p).value, coh, size_measure(cfg, p)) for p in ps]
    path = write_csv(Path(args.out) / "potential.csv", ["p", "fp", "coherence", "g_p"], rows)
    _finish(args, _manifest(args), [path])
    return 0


def _bound_check(d, n, p, value):
    """Applicable bounds, plus the tightest proven one the value must respect."""
    reports = applicable_bounds(d, n, p)
    conjectural = d > 2 and n == d + 1 and p < 2
    proven = [b for b in reports
              if b.applicable and b.name != "phase_p0"
              and not (conjectural and b.name == "onb_plus_repeat")]
    best = max(proven, key=lambda b: b.value)
    if value < best.value - BOUND_SLACK * max(1.0, best.value):
        raise ArithmeticError(f"minimum {value!r} lies below the {best.name} bound {best.value!r}")
    return reports, best


def _minimize_one(opt: OptimizerConfig, threads: int) -> dict:
    res = minimize_fp(opt, threads)
    reports, best = _bound_check(opt.d, opt.N, opt.p, res.value)
    out = res.to_dict()
    out["nonconverged"] = not res.converged
    out["bounds"] = [b.to_dict() for b in reports]
    out["largest_proven_bound"] = {"name": best.name, "value": best.value,
                                   "gap": res.value - best.value}
    if opt.d > 2 and opt.N == opt.d + 1 and opt.p < 2:
        conj = dplus1_min(opt.d, opt.p)
        out["label"] = "conjectural evidence"
        out["conjectured_minimum"] = {"name": conj.name, "value": conj.value,
                                      "p0": phase_p0(opt.d).value,
                                      "note": "numerical evidence for an unproven claim"}
    return out


def cmd_minimize(args) -> int:
    data, _ = _load_config(args)
    data = dict(data)
    if args.seed is not None:
        data["seed"] = args.seed
    ps = data.pop("p", None)
    sweep = isinstance(ps, list)
    runs = []
    try:
        for p in _p_list(ps):
            opt = OptimizerConfig.from_dict({**data, "p": p})
            runs.append(_minimize_one(opt, args.threads))
    except TypeError as exc:
        raise InputError(f"bad optimizer config: {exc}") from None
    doc = {"runs": runs} if sweep else runs[0]
    path = write_json(Path(args.out) / "minimize.json", doc)
    _finish(args, _manifest(args, {"nonconverged": [r["p"] for r in runs if r["nonconverged"]]}),
            [path])
    for r in runs:
        flag = " nonconverged" if r["nonconverged"] else ""
        label = f" [{r['label']}]" if "label" in r else ""
        print(f"p={r['p']:g} value={r['value']:.12g}{flag}{label}")
    return 0


def cmd_figure1(args) -> int:
    seed = args.seed if args.seed is not None else 0
    rows = figure1_curve(figure1_grid(args.step), restarts=args.restarts, seed=seed,
                         threads=args.threads)
    diff = max(abs(r.closed_form - r.optimized) for r in rows)
    path = write_csv(Path(args.out) / "figure1.csv", ["p", "closed_form", "optimized"],
                     [(r.p, r.closed_form, r.optimized) for r in rows])
    summary = {"max_abs_diff": diff, "tolerance": 1e-4, "within_tolerance": diff <= 1e-4}
    if not args.no_kink:
        kink = locate_kink(seed=seed)
        summary.update(kink=kink, kink_closed_form=math.log(3) / math.log(2))
    _finish(args, _manifest(args, summary), [path])
    print(f"max |closed_form - optimized| = {diff:.3g}")
    if "kink" in summary:
        print(f"kink at p = {summary['kink']:.6f} (log 3 / log 2 = {summary['kink_closed_form']:.6f})")
    return 0


def _pfp_entry(mu, p):
    entry = {"p": p, "pfp": pfp(mu, p)}
    if p >= 1:
        chk = pframe_check(mu, p)
        entry["pframe_check"] = chk.to_dict()
        entry["tight"] = chk.is_tight
    else:
        entry["pframe_check"] = None
    d = mu.dim
    try:
        entry["uniform_pfp"] = uniform_pfp(d, p)
    except ValueError:
        entry["uniform_pfp"] = None
    if float(p).is_integer() and int(p) % 2 == 0:
        lam0 = float(double_factorial_ratio(d, int(p)))
        if entry["pfp"] < lam0 - 1e-9:
            raise ArithmeticError("pfp lies below lambda_0 for even p")
        entry["lambda0_bound"] = lam0
    if p < 2:
        entry["lower_bound_one_over_d"] = 1.0 / d
    entry["support_check"] = minimizer_support_check(mu, p, tol=1e-8).to_dict()
    return entry


def cmd_pfp(args) -> int:
    data, base = _load_config(args)
    ps = _p_list(args.p if args.p else data.get("p"))
    doc = {}
    if "atoms" in data:
        mu = measure_from_dict(data)
    elif data.get("measure") is not None:
        mu = measure_from_dict(resolve(data["measure"], base))
    else:
        mu = None
    if mu is None and not args.minimize:
        raise InputError('config needs a "measure" (or use --minimize)')
    if mu is not None:
        doc["measure"] = mu.to_dict()
        doc["values"] = [_pfp_entry(mu, p) for p in ps]
    if args.minimize:
        opts = data.get("minimize", {})
        m = args.minimize_atoms or opts.get("M")
        d = opts.get("d", mu.dim if mu is not None else None)
        if not m or not d:
            raise InputError("minimizing needs M (--M) and d")
        runs = []
        for p in ps:
            opt = dict(opts.get("optimizer", {}))
            if args.seed is not None:
                opt["seed"] = args.seed
            try:
                cfg = OptimizerConfig.from_dict({**opt, "d": int(d), "N": int(m), "p": p})
            except TypeError as exc:
                raise InputError(f"bad optimizer config: {exc}") from None
            res = minimize_pfp(int(d), int(m), p, cfg)
            out = res.to_dict()
            out["nonconverged"] = not res.converged
            runs.append(out)
        doc["minimized"] = runs
    path = write_json(Path(args.out) / "pfp.json", doc)
    _finish(args, _manifest(args), [path])
    for e in doc.get("values", []):
        tight = e.get("tight")
        print(f"p={e['p']:g} pfp={e['pfp']:.12g}" + ("" if tight is None else f" tight={tight}"))
    for r in doc.get("minimized", []):
        print(f"p={r['p']:g} minimized pfp={r['value']:.12g}")
    return 0


def cmd_bounds(args) -> int:
    d, n, p = args.d, args.N, args.p
    if d < 1 or n < 1 or not (p > 0 and math.isfinite(p)):
        raise InputError("need d >= 1, N >= 1 and finite p > 0")
    reports = applicable_bounds(d, n, p)
    even = float(p).is_integer() and int(p) % 2 == 0
    if even:
        reports.append(venkov_bound(d, n, p))
    doc = {"d": d, "N": n, "p": p, "bounds": [b.to_dict() for b in reports]}
    lines = [f"{b.name:18s} {b.value:.12g}  applicable={b.applicable}  {b.sharpness_note}"
             for b in reports]
    if even and p > 2:
        cmp = compare_bounds(d, n, p)
        doc["comparison"] = cmp.to_dict()
        if cmp.condition_met:
            lines.append("equiangular > welch holds (d < N <= C(d+p/2-1, p/2))")
    print("\n".join(lines))
    paths = []
    if args.out:
        paths.append(write_json(Path(args.out) / "bounds.json", doc))
        _finish(args, _manifest(args), paths)
    return 0


def cmd_certify(args) -> int:
    data, base = _load_config(args)
    if "points" in data:
        cfg = configuration_from_dict(data)
        data = {}
    else:
        cfg = configuration_from_dict(resolve(data.get("configuration"), base))
    tol = float(data.get("tol", 1e-8))
    t = int(data.get("design_strength", 2))
    reports = [is_funtf(cfg, tol)]
    if cfg.n >= 2:
        reports += [is_equiangular(cfg, tol), is_equiangular_funtf(cfg, tol)]
    reports.append(is_spherical_design(cfg, t, tol))
    fb = frame_bounds(cfg)
    doc = {
        "configuration": configuration_to_dict(cfg),
        "certificates": [r.to_dict() for r in reports],
        "frame_bounds": {"lower": fb.lower, "upper": fb.upper, "is_frame": fb.is_frame},
    }
    pm = procrustes_direction(cfg)
    doc["procrustes"] = {"direction": pm.direction.tolist(), "eigenvalue": pm.eigenvalue,
                         "degenerate": pm.degenerate}
    if data.get("tyler", True):
        try:
            ty = tyler_fixed_point(cfg)
            doc["tyler"] = {"converged": ty.converged, "residual": ty.residual,
                            "iterations": ty.iterations, "message": ty.message,
                            "gamma": ty.gamma.tolist()}
        except ValueError as exc:
            doc["tyler"] = {"converged": False, "message": str(exc)}
    path = write_json(Path(args.out) / "certify.json", doc)
    _finish(args, _manifest(args), [path])
    for r in reports:
        print(f"{r.kind:18s} holds={r.holds} residual={r.residual:.3g}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON input file")
    common.add_argument("--out", default=".", help="output directory (default: .)")
    common.add_argument("--seed", type=int, default=None, help="override the config seed")
    common.add_argument("--threads", type=int, default=1, help="worker threads for restarts")

    parser = argparse.ArgumentParser(prog="pframe", description="p-frame potentials on the sphere")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    s = sub.add_parser("potential", parents=[common], help="FP, coherence and g_p of a configuration")
    s.add_argument("--p", type=float, nargs="+", help="exponents (overrides the config)")
    s.set_defaults(func=cmd_potential)

    s = sub.add_parser("minimize", parents=[common], help="minimize FP over N points")
    s.set_defaults(func=cmd_minimize)

    s = sub.add_parser("figure1", parents=[common], help="minimum of FP_{p,3} in R^2 over p")
    s.add_argument("--step", type=float, default=0.05)
    s.add_argument("--restarts", type=int, default=64)
    s.add_argument("--no-kink", action="store_true", help="skip locating the branch crossover")
    s.set_defaults(func=cmd_figure1)

    s = sub.add_parser("pfp", parents=[common], help="probabilistic potential of a measure")
    s.add_argument("--p", type=float, nargs="+", help="exponents (overrides the config)")
    s.add_argument("--minimize", action="store_true", help="also minimize over measures")
    s.add_argument("--M", dest="minimize_atoms", type=int, help="number of atoms when minimizing")
    s.set_defaults(func=cmd_pfp)

    s = sub.add_parser("bounds", parents=[common], help="closed-form bounds for (d, N, p)")
    s.add_argument("--d", type=int, required=True)
    s.add_argument("--N", type=int, required=True)
    s.add_argument("--p", type=float, required=True)
    s.set_defaults(func=cmd_bounds, out=None)

    s = sub.add_parser("certify", parents=[common], help="tightness, equiangularity, designs, Tyler")
    s.set_defaults(func=cmd_certify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    args = parser.parse_args(argv)
    args.argv = argv
    if args.threads < 1:
        parser.error("--threads must be at least 1")
    try:
        if args.out:
            Path(args.out).mkdir(parents=True, exist_ok=True)
        return args.func(args)
    except ArithmeticError as exc:
        print(f"pframe: invariant violated: {exc}", file=sys.stderr)
        return 3
    except (InputError, ValueError) as exc:
        print(f"pframe: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
