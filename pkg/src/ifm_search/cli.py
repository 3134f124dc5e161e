"""Command-line entry point.

Exit codes: 0 success, 1 runtime/domain error, 2 usage error, 3 validation failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys

from . import __version__
from . import closed_form as cf
from .analysis import SweepGrid, fig3_dataset, sweep, validate_grid
from .baselines import ComparisonRow, classical_success, grover_success
from .circuit import (
    SearchParams,
    ThetaMode,
    final_success,
    initial_record,
    monte_carlo,
    run_search,
)

EXIT_OK, EXIT_RUNTIME, EXIT_USAGE, EXIT_VALIDATION = 0, 1, 2, 3
THREADS_ENV = "QSEARCH_THREADS"


class UsageError(Exception):
    pass


class RuntimeFailure(Exception):
    pass


# -- formatting ---------------------------------------------------------------


def _num(x):
    if x is None:
        return None
    if isinstance(x, bool) or isinstance(x, int):
        return x
    if math.isnan(x):
        return None
    return float(f"{x:.12g}")


def _cell(x) -> str:
    if x is None:
        return ""
    if isinstance(x, float):
        return "nan" if math.isnan(x) else f"{x:.12g}"
    return str(x)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, float):
        return _num(obj)
    return obj


def _render(fmt, columns, rows, extra=None) -> str:
    if fmt == "json":
        doc = dict(extra or {})
        doc["rows"] = [dict(zip(columns, row)) for row in rows]
        return json.dumps(_jsonable(doc), indent=2) + "\n"
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_cell(v) for v in row])
    return buf.getvalue()


def _emit(text: str, path: str | None) -> None:
    if path is None:
        sys.stdout.write(text)
        return
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise RuntimeFailure(f"cannot write {path}: {exc}") from exc


def _note(msg: str) -> None:
    print(msg, file=sys.stderr)


def _threads() -> int:
    raw = os.environ.get(THREADS_ENV)
    if not raw:
        return 1
    try:
        return max(1, int(raw))
    except ValueError:
        raise UsageError(f"{THREADS_ENV} must be an integer, got {raw!r}") from None


# -- argument handling ----------------------------------------------------------


def _int_list(text: str) -> list[int]:
    try:
        values = [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")
    if not values:
        raise argparse.ArgumentTypeError("empty list")
    return values


def _add_theta(p):
    group = p.add_mutually_exclusive_group()
    group.add_argument("--theta", type=float, help="rotation angle in radians")
    group.add_argument(
        "--theta-mode",
        choices=[m.value for m in ThetaMode],
        help="angle preset (default pi-over-m)",
    )


def _add_output(p):
    p.add_argument("--format", choices=["csv", "json"], default="csv")
    p.add_argument("-o", "--output", help="write to file instead of stdout")


def _add_instance(p, k_default=1):
    p.add_argument("--n", type=int, required=True, help="number of boxes N")
    p.add_argument("--m", type=int, required=True, help="small cycles per oracle M")
    p.add_argument("--k", type=int, default=k_default, help="large cycles k")
    p.add_argument("--target", type=int, default=0, help="index of the marked box")
    _add_theta(p)


def _add_grid(p, default_scale):
    p.add_argument("--n", type=_int_list, help="comma-separated box counts")
    p.add_argument("--m", type=_int_list, help="comma-separated small-cycle counts")
    p.add_argument("--k-max", type=int, help="fixed largest k for every N")
    p.add_argument("--k-scale", type=float, default=default_scale,
                   help="k runs to ceil(scale*sqrt(N)) when --k-max is absent")
    p.add_argument("--theta-mode", choices=[m.value for m in ThetaMode],
                   default=ThetaMode.PI_OVER_M.value)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ifm-search",
        description="Simulate the interaction-free-measurement Grover search.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="per-large-cycle records for one instance")
    _add_instance(p)
    p.add_argument("--closed-form", action="store_true",
                   help="require the closed-form columns (exit 1 if unavailable)")
    _add_output(p)

    p = sub.add_parser("mc", help="Monte Carlo trajectories")
    _add_instance(p)
    p.add_argument("--trials", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=0)
    _add_output(p)

    p = sub.add_parser("compare", help="classical vs Grover vs IFM-Grover at fixed query budget")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--queries", type=int, required=True)
    p.add_argument("--m", type=int)
    p.add_argument("--k", type=int)
    p.add_argument("--target", type=int, default=0)
    p.add_argument("--search", action="store_true",
                   help="try every factorization queries = k*M")
    _add_theta(p)
    _add_output(p)

    p = sub.add_parser("fig3", help="tau, survival and success curves versus k")
    p.add_argument("--n", type=int, default=64)
    p.add_argument("--m", type=_int_list, default=[9, 12, 32])
    p.add_argument("--k-max", type=int, default=20)
    _add_output(p)

    p = sub.add_parser("validate", help="closed form against brute-force simulation")
    _add_grid(p, 2.0)
    _add_output(p)

    p = sub.add_parser("sweep", help="circuit-simulation success over a grid")
    _add_grid(p, 2.0)
    _add_output(p)
    return parser


def _params_from(args, parser) -> SearchParams:
    for flag, value, low in (("--n", args.n, 2), ("--m", args.m, 1), ("--k", args.k, 0)):
        if value < low:
            parser.error(f"argument {flag}: must be >= {low}, got {value}")
    if not 0 <= args.target < args.n:
        parser.error(f"argument --target: must lie in [0, {args.n}), got {args.target}")
    if args.theta is not None:
        if not 0.0 < args.theta <= math.pi:
            parser.error(f"argument --theta: must lie in (0, pi], got {args.theta}")
        return SearchParams(args.n, args.m, args.theta, args.k, args.target)
    mode = args.theta_mode or ThetaMode.PI_OVER_M.value
    return SearchParams.preset(args.n, args.m, args.k, mode, args.target)


def _grid_from(args, parser) -> SweepGrid:
    n_values = tuple(args.n) if args.n else SweepGrid.n_values
    m_values = tuple(args.m) if args.m else SweepGrid.m_values
    if min(n_values) < 2:
        parser.error("argument --n: every value must be >= 2")
    if min(m_values) < 1:
        parser.error("argument --m: every value must be >= 1")
    if args.k_max is not None and args.k_max < 0:
        parser.error("argument --k-max: must be >= 0")
    if args.k_scale <= 0:
        parser.error("argument --k-scale: must be positive")
    return SweepGrid(n_values, m_values, args.k_max, args.k_scale, args.theta_mode)


# -- commands -------------------------------------------------------------------


def _closed_form_rows(params: SearchParams, required: bool):
    if not params.is_pi_over_m:
        msg = "closed form needs theta = pi/M"
        if required:
            raise RuntimeFailure(msg)
        return None, msg
    try:
        return cf.trajectory(params.n_boxes, params.small_cycles, params.theta,
                             params.large_cycles), None
    except (cf.DegenerateLeak, cf.NormalizationUnderflow, cf.BranchResidue) as exc:
        if required:
            raise RuntimeFailure(f"closed form unavailable: {exc}") from exc
        return None, f"closed form unavailable: {exc}"


def cmd_run(args, parser) -> int:
    params = _params_from(args, parser)
    records = [initial_record(params.n_boxes)] + run_search(params)
    closed, reason = _closed_form_rows(params, args.closed_form)
    columns = ["k", "tau", "alpha", "cycle_survival", "survival", "success",
               "cf_tau", "cf_survival", "cf_success"]
    rows = []
    for rec in records:
        cf_cols = list(closed[rec.cycle_index]) if closed else [None, None, None]
        rows.append([rec.cycle_index, rec.tau, rec.alpha, rec.cycle_survival,
                     rec.cumulative_survival, rec.success_probability] + cf_cols)
    extra = {
        "n": params.n_boxes, "m": params.small_cycles, "k": params.large_cycles,
        "theta": params.theta, "target": params.target, "queries": params.queries,
        "success": records[-1].success_probability,
        "closed_form_available": closed is not None,
    }
    if reason:
        extra["closed_form_note"] = reason
        _note(reason)
    _emit(_render(args.format, columns, rows, extra), args.output)
    return EXIT_OK


def cmd_mc(args, parser) -> int:
    if args.trials < 1:
        parser.error(f"argument --trials: must be >= 1, got {args.trials}")
    if not 0 <= args.seed < 2**64:
        parser.error("argument --seed: must be an unsigned 64-bit integer")
    params = _params_from(args, parser)
    dist = monte_carlo(params, args.trials, args.seed)

    records = run_search(params)
    p_success = final_success(params)
    p_explode, reached = 0.0, 1.0
    for rec in records:
        p_explode += reached * rec.cycle_explosion
        reached = rec.cumulative_survival

    def sigma_count(observed, p):
        sd = math.sqrt(p * (1.0 - p) / args.trials)
        return sd, (observed - p) / sd if sd > 0 else (0.0 if observed == p else math.inf)

    target_frac = dist.detection_fraction(params.target)
    explode_frac = dist.total_explosions / args.trials
    t_sd, t_z = sigma_count(target_frac, p_success)
    e_sd, e_z = sigma_count(explode_frac, p_explode)
    summary = {
        "n": params.n_boxes, "m": params.small_cycles, "k": params.large_cycles,
        "theta": params.theta, "target": params.target, "seed": args.seed,
        **dist.to_dict(),
        "target_fraction": target_frac, "analytic_success": p_success,
        "target_sigma": t_sd, "target_z": t_z,
        "explosion_fraction": explode_frac, "analytic_explosion": p_explode,
        "explosion_sigma": e_sd, "explosion_z": e_z,
    }
    if args.format == "json":
        text = json.dumps(_jsonable(summary), indent=2) + "\n"
    else:
        rows = []
        for key, value in summary.items():
            if isinstance(value, dict):
                rows.extend([f"{key}[{k}]", v] for k, v in value.items())
            else:
                rows.append([key, value])
        text = _render("csv", ["quantity", "value"], rows)
    _emit(text, args.output)
    return EXIT_OK


def cmd_compare(args, parser) -> int:
    if args.n < 2:
        parser.error(f"argument --n: must be >= 2, got {args.n}")
    if args.queries < 0:
        parser.error(f"argument --queries: must be >= 0, got {args.queries}")
    if args.queries > args.n:
        parser.error(f"argument --queries: {args.queries} exceeds --n {args.n}; "
                     "classical search cannot use more distinct queries than boxes")
    if args.search:
        pairs = [(m, args.queries // m) for m in range(1, args.queries + 1)
                 if args.queries % m == 0]
    else:
        if args.m is None or args.k is None:
            parser.error("arguments --m and --k are required unless --search is given")
        if args.m * args.k != args.queries:
            parser.error(f"argument --queries: {args.queries} != k*M = {args.k * args.m}; "
                         "pass --search to try every factorization")
        pairs = [(args.m, args.k)]

    rows = []
    for m, k in pairs:
        ns = argparse.Namespace(n=args.n, m=m, k=k, target=args.target,
                                theta=args.theta, theta_mode=args.theta_mode)
        params = _params_from(ns, parser)
        rows.append(ComparisonRow(
            args.n, args.queries,
            classical_success(args.n, args.queries),
            grover_success(args.n, args.queries),
            final_success(params),
            m, params.theta, k,
        ))
    columns = ["n", "queries", "m", "k", "classical", "grover", "ifm_grover"]
    table = [[r.n_boxes, r.queries, r.small_cycles, r.large_cycles,
              r.classical, r.grover, r.ifm_grover] for r in rows]
    _emit(_render(args.format, columns, table), args.output)
    return EXIT_OK


def cmd_fig3(args, parser) -> int:
    if args.n < 2:
        parser.error(f"argument --n: must be >= 2, got {args.n}")
    if args.k_max < 0:
        parser.error(f"argument --k-max: must be >= 0, got {args.k_max}")
    if min(args.m) < 1:
        parser.error("argument --m: every value must be >= 1")
    try:
        data = fig3_dataset(args.n, args.m, args.k_max)
    except (cf.DegenerateLeak, cf.NormalizationUnderflow, cf.BranchResidue) as exc:
        raise RuntimeFailure(str(exc)) from exc
    columns = ["n", "m", "k", "tau", "survival", "success"]
    rows = [[args.n, r.m, r.k, r.tau, r.survival, r.success] for r in data.rows]
    regimes = {m: {"cos_phi": p.cos_phi, "regime": p.regime.value}
               for m, p in data.regimes.items()}
    for m, info in regimes.items():
        _note(f"M={m}: cos_phi={info['cos_phi']:.12g} regime={info['regime']}")
    _emit(_render(args.format, columns, rows, {"n": args.n, "regimes": regimes}), args.output)
    return EXIT_OK


def cmd_validate(args, parser) -> int:
    grid = _grid_from(args, parser)
    if grid.theta_mode is not ThetaMode.PI_OVER_M:
        parser.error("argument --theta-mode: validation is only defined for pi-over-m")
    report = validate_grid(grid, workers=_threads())
    columns = ["n", "m", "k", "diff_tau", "diff_survival"]
    rows = [[r.n, r.m, r.k, r.diff_tau, r.diff_survival] for r in report.rows]
    summary = {k: v for k, v in report.to_dict().items() if k != "rows"}
    _note(f"max_abs_diff_tau={report.max_abs_diff_tau:.12g} "
          f"max_abs_diff_survival={report.max_abs_diff_survival:.12g} "
          f"worst_point={report.worst_point} passed={report.passed}")
    for n, m, reason in report.skipped:
        _note(f"skipped N={n} M={m}: {reason}")
    _emit(_render(args.format, columns, rows, summary), args.output)
    return EXIT_OK if report.passed else EXIT_VALIDATION


def cmd_sweep(args, parser) -> int:
    grid = _grid_from(args, parser)
    rows = sweep(grid, workers=_threads())
    columns = ["n", "m", "k", "theta", "tau", "survival", "success"]
    table = [[r.n, r.m, r.k, r.theta, r.tau, r.survival, r.success] for r in rows]
    _emit(_render(args.format, columns, table, {"grid": grid.to_dict()}), args.output)
    return EXIT_OK


COMMANDS = {
    "run": cmd_run,
    "mc": cmd_mc,
    "compare": cmd_compare,
    "fig3": cmd_fig3,
    "validate": cmd_validate,
    "sweep": cmd_sweep,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return COMMANDS[args.command](args, parser)
    except UsageError as exc:
        _note(f"error: {exc}")
        return EXIT_USAGE
    except RuntimeFailure as exc:
        _note(f"error: {exc}")
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
