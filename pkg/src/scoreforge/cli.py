"""Command-line entry point.

Subcommands: solve, score, gain, settle, asymptotic, figures, converge-log.
Exit codes: 0 success, 1 error, 2 degenerate (a constant structure forces a
zero optimum).  ``--config file.json`` overrides the corresponding flags.
``SCOREFORGE_THREADS`` caps worker threads for independent solves.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import serialize
from .asymptotics import (
    beta_limit_sweep,
    dirichlet_limit_sweep,
    lp_log_convergence,
    quadratic_limit_sweep,
)
from .gain import objective
from .geometry import (
    LogRule,
    SimplexPoint,
    SingularityError,
    SymmetrizedBinaryRule,
    builtin_rule,
    savage_score,
    simplex_grid,
)
from .lp import build_lp, extract_H, solve_lp
from .settlement import region_points, settle_on_region
from .structures import beta_collection_adaptive, beta_collection_static

DEFAULT_SEED = 20240613


def _thread_count() -> int:
    try:
        return max(1, int(os.environ.get("SCOREFORGE_THREADS", "1")))
    except ValueError:
        return 1


def _parallel_map(fn, items):
    workers = _thread_count()
    if workers == 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def _load_rule(spec: str, d: int):
    if spec in ("quadratic", "spherical", "log"):
        return builtin_rule(spec, d)
    return serialize.rule_from_json(serialize.read_json(spec))


def _parse_point(text: str, d: int):
    parts = [float(v) for v in text.split(",")]
    if len(parts) == 1 and d == 2:
        return parts[0]
    return parts


def _curve_rows(rule, grid: int):
    if rule.d == 2:
        xs = np.linspace(0.0, 1.0, grid)
        pts = np.column_stack([xs, 1.0 - xs])
        vals = rule.values(pts)
        return ["theta", "H"], list(zip(xs.tolist(), vals.tolist()))
    res = max(2, int(round(grid ** (1.0 / (rule.d - 1)))))
    pts = simplex_grid(rule.d, res)
    vals = rule.values(pts)
    header = [f"x{i + 1}" for i in range(rule.d)] + ["H"]
    return header, [tuple(p) + (v,) for p, v in zip(pts.tolist(), vals.tolist())]


def cmd_solve(args) -> int:
    coll = serialize.collection_from_json(serialize.read_json(args.collection))
    inst = build_lp(coll)
    sol = solve_lp(inst)
    rule = extract_H(sol)
    if args.out:
        serialize.write_json(args.out, serialize.rule_to_json(rule))
    if args.csv:
        header, rows = _curve_rows(rule, args.grid)
        serialize.write_csv(args.csv, header, rows)
    cert = sol.certificate
    print(f"optimum {sol.opt:.12g}")
    print(f"certificate primal_residual={cert.primal_residual:.3g} "
          f"dual_residual={cert.dual_residual:.3g} gap={cert.duality_gap:.3g} "
          f"ok={cert.ok(sol.opt)}")
    if sol.degenerate:
        print("warning: collection contains a constant structure; "
              "any bounded convex rule is optimal", file=sys.stderr)
        return 2
    return 0


def cmd_score(args) -> int:
    rule = _load_rule(args.rule, args.d)
    x = _parse_point(args.x, rule.d)
    score = savage_score(rule, args.omega, x)
    print(f"{score:.12g}")
    return 0


def cmd_gain(args) -> int:
    rule = _load_rule(args.rule, args.d)
    coll = serialize.collection_from_json(serialize.read_json(args.collection))
    report = objective(rule, coll)
    if args.csv:
        serialize.write_csv(args.csv, ["label", "J"], report.rows())
    print(f"objective {report.objective:.12g} argmin {report.argmin_label}")
    return 0


def cmd_settle(args) -> int:
    rule = serialize.rule_from_json(serialize.read_json(args.rule))
    coll = settle_on_region(rule, args.delta, grid_step=args.grid_step)
    serialize.write_json(args.out, serialize.collection_to_json(coll))
    print(f"emitted {len(coll)} structures at gain {args.delta:g}")
    if args.verify:
        sol = solve_lp(build_lp(coll))
        resolved = extract_H(sol)
        rows = []
        worst = 0.0
        for pt in region_points(rule, args.delta, grid_step=args.grid_step):
            want = rule.value(pt.coords)
            got = resolved.value(pt.coords)
            worst = max(worst, abs(want - got))
            rows.append(tuple(pt.coords.tolist()) + (want, got, abs(want - got)))
        header = [f"x{i + 1}" for i in range(rule.d)] + \
                 ["H_target", "H_resolved", "abs_diff"]
        if args.verify_csv:
            serialize.write_csv(args.verify_csv, header, rows)
        print(f"re-solve optimum {sol.opt:.12g} (target {args.delta:g}); "
              f"max point deviation {worst:.3g}")
    return 0


def cmd_asymptotic(args) -> int:
    n_values = [int(v) for v in args.n.split(",")]
    if args.family == "quadratic":
        rule = builtin_rule(args.rule, args.d)
        sweep = quadratic_limit_sweep(rule, args.d, n_values, seed=args.seed)
    elif args.family == "beta":
        rule = builtin_rule(args.rule, 2)
        sweep = beta_limit_sweep(rule, n_values, delta_exponent=args.delta_exp)
    else:
        rule = builtin_rule(args.rule, args.d)
        sweep = dirichlet_limit_sweep(rule, args.d, n_values,
                                      delta_exponent=args.delta_exp)
    rows = sweep.rows()
    if args.csv:
        serialize.write_csv(args.csv, ["n", "scaled_obj", "target", "abs_err"],
                            rows)
    for n, s, tgt, err in rows:
        print(f"n={n} scaled={s:.9g} target={tgt:.9g} abs_err={err:.3g}")
    if sweep.fitted_rate is not None:
        print(f"fitted log-log rate {sweep.fitted_rate:.3f}")
    return 0


def cmd_figures(args) -> int:
    os.makedirs(args.out_dir, exist_ok=True)
    ln = LogRule(2)
    xs = np.linspace(0.0, 1.0, args.grid)
    pts = np.column_stack([xs, 1.0 - xs])

    def solve_family(spec):
        name, coll = spec
        sol = solve_lp(build_lp(coll))
        return name, SymmetrizedBinaryRule(extract_H(sol))

    families = [(f"static_N{n}", beta_collection_static(n)) for n in (5, 10)]
    families += [(f"adaptive_N{n}", beta_collection_adaptive(n)) for n in (5, 10)]
    for name, rule in _parallel_map(solve_family, families):
        serialize.write_csv(
            os.path.join(args.out_dir, f"figure2_{name}.csv"),
            ["theta", "H"], list(zip(xs.tolist(), rule.values(pts).tolist())))

    rows = lp_log_convergence((5, 10, 20), grid_resolution=args.grid)
    for N in (10, 20):
        sol = solve_lp(build_lp(beta_collection_static(N)))
        rule = SymmetrizedBinaryRule(extract_H(sol))
        hv = rule.values(pts)
        lv = ln.values(pts)
        serialize.write_csv(
            os.path.join(args.out_dir, f"figure3_N{N}.csv"),
            ["theta", "H_opt", "H_log", "diff"],
            list(zip(xs.tolist(), hv.tolist(), lv.tolist(),
                     np.abs(hv - lv).tolist())))
    serialize.write_csv(
        os.path.join(args.out_dir, "figure3_diff.csv"),
        ["N", "max_abs_diff"], [(r.N, r.sup_dev) for r in rows])
    print(f"wrote figure CSVs to {args.out_dir}")
    return 0


def cmd_converge_log(args) -> int:
    n_values = tuple(int(v) for v in args.n.split(","))
    rows = lp_log_convergence(n_values, grid_resolution=args.grid)
    if args.csv:
        serialize.write_csv(
            args.csv, ["N", "sup_dev", "sup_dev_support", "dev_at_center"],
            [(r.N, r.sup_dev, r.sup_dev_support, r.dev_at_center) for r in rows])
    for r in rows:
        print(f"N={r.N} sup_dev={r.sup_dev:.6g} "
              f"support={r.sup_dev_support:.6g} center={r.dev_at_center:.3g}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="scoreforge",
        description="Bounded proper scoring rules maximizing worst-case "
                    "information gain.")
    p.add_argument("--config", help="JSON file whose keys override flags")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("solve", help="optimal rule for a collection JSON")
    s.add_argument("--collection", required=True)
    s.add_argument("--out", help="write the optimal rule JSON here")
    s.add_argument("--csv", help="write the rule curve CSV here")
    s.add_argument("--grid", type=int, default=401)
    s.set_defaults(func=cmd_solve)

    s = sub.add_parser("score", help="Savage-form score of a report")
    s.add_argument("--rule", required=True,
                   help="quadratic|spherical|log or a rule JSON path")
    s.add_argument("--d", type=int, default=2)
    s.add_argument("--omega", type=int, required=True)
    s.add_argument("--x", required=True, help="scalar (d=2) or comma coords")
    s.set_defaults(func=cmd_score)

    s = sub.add_parser("gain", help="per-structure gains and the objective")
    s.add_argument("--rule", required=True)
    s.add_argument("--d", type=int, default=2)
    s.add_argument("--collection", required=True)
    s.add_argument("--csv")
    s.set_defaults(func=cmd_gain)

    s = sub.add_parser("settle", help="emit a collection pinning a rule")
    s.add_argument("--rule", required=True, help="rule JSON path")
    s.add_argument("--delta", type=float, required=True)
    s.add_argument("--out", required=True)
    s.add_argument("--grid-step", type=float, default=0.05)
    s.add_argument("--verify", action="store_true")
    s.add_argument("--verify-csv")
    s.set_defaults(func=cmd_settle)

    s = sub.add_parser("asymptotic", help="scaled worst-case gain sweeps")
    s.add_argument("family", choices=["beta", "dirichlet", "quadratic"])
    s.add_argument("--rule", default="log",
                   choices=["log", "quadratic", "spherical"])
    s.add_argument("--n", default="10,100,1000")
    s.add_argument("--d", type=int, default=2)
    s.add_argument("--delta-exp", type=float, default=0.5)
    s.add_argument("--seed", type=int, default=DEFAULT_SEED)
    s.add_argument("--csv")
    s.set_defaults(func=cmd_asymptotic)

    s = sub.add_parser("figures", help="reproduce the optimal-rule figures as CSV")
    s.add_argument("--out-dir", default="figures")
    s.add_argument("--grid", type=int, default=401)
    s.set_defaults(func=cmd_figures)

    s = sub.add_parser("converge-log",
                       help="distance of solved optima from the log rule")
    s.add_argument("--n", default="5,10,20")
    s.add_argument("--grid", type=int, default=401)
    s.add_argument("--csv")
    s.set_defaults(func=cmd_converge_log)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.config:
        try:
            overrides = serialize.read_json(args.config)
        except json.JSONDecodeError as exc:
            print(f"config parse error at line {exc.lineno} column {exc.colno}: "
                  f"{exc.msg}", file=sys.stderr)
            return 1
        for key, value in overrides.items():
            setattr(args, key.replace("-", "_"), value)
    try:
        return args.func(args)
    except json.JSONDecodeError as exc:
        print(f"JSON parse error at line {exc.lineno} column {exc.colno}: "
              f"{exc.msg}", file=sys.stderr)
        return 1
    except FileNotFoundError as exc:
        print(f"file not found: {exc.filename}", file=sys.stderr)
        return 1
    except SingularityError as exc:
        print(f"singularity: {exc}", file=sys.stderr)
        return 1
    except (ValueError, TypeError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
