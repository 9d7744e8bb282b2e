"""Command-line front end.

    psicaputo solve --config problem.json --out solution.csv --format csv
    psicaputo check --config problem.json --which banach
    psicaputo validate --n 128,256,512

Exit codes: 0 ok / hypothesis satisfied, 1 hypothesis unsatisfied,
2 no convergence, 3 divergence, 4 I/O error, 5 config error.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from pathlib import Path

from .config import ConfigIOError, ProblemConfig, SchemaError, build_problem, load_config, scalar_fn
from .expr import ExprError
from .kernel import DomainError
from .solver import Solution, Status, banach_check, banach_find_h, ls_check, picard_solve
from .validation import format_table, rows_as_dicts, run_validation

log = logging.getLogger("psicaputo")

EXIT_OK = 0
EXIT_UNSATISFIED = 1
EXIT_NON_CONVERGENCE = 2
EXIT_DIVERGED = 3
EXIT_IO = 4
EXIT_CONFIG = 5

STATUS_EXIT = {
    Status.CONVERGED: EXIT_OK,
    Status.NON_CONVERGENCE: EXIT_NON_CONVERGENCE,
    Status.DIVERGED: EXIT_DIVERGED,
}


def _fmt(value: float) -> str:
    return repr(float(value))


def write_csv(solution: Solution, path: Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t", "psi_t", "x"])
        for t, s, x in zip(solution.t, solution.psi_values, solution.x_values):
            writer.writerow([_fmt(t), _fmt(s), _fmt(x)])


def write_json(solution: Solution, path: Path) -> None:
    doc = {
        "table": {
            "t": [float(v) for v in solution.t],
            "psi_t": [float(v) for v in solution.psi_values],
            "x": [float(v) for v in solution.x_values],
        },
        "diagnostics": solution.diagnostics(),
    }
    Path(path).write_text(json.dumps(doc, indent=1), encoding="utf-8")


def diagnostics_path(out: Path) -> Path:
    return out.with_name(out.name + ".diagnostics.json")


def cmd_solve(cfg: ProblemConfig, out: Path, fmt: str = "csv") -> int:
    try:
        problem = build_problem(cfg)
    except (DomainError, ExprError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        solution = picard_solve(problem, cfg.solver_config)
    except ExprError as exc:
        # f left its domain during the iteration
        print(f"solve failed: {exc}", file=sys.stderr)
        return EXIT_DIVERGED
    out = Path(out)
    try:
        if fmt == "json":
            write_json(solution, out)
        else:
            write_csv(solution, out)
            diagnostics_path(out).write_text(
                json.dumps(solution.diagnostics(), indent=2), encoding="utf-8"
            )
    except OSError as exc:
        print(f"cannot write {out}: {exc}", file=sys.stderr)
        return EXIT_IO
    print(json.dumps(solution.diagnostics(), indent=2))
    return STATUS_EXIT[solution.status]


def cmd_check(cfg: ProblemConfig, which: str) -> int:
    try:
        problem = build_problem(cfg)
    except (DomainError, ExprError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    n = cfg.n
    if which == "banach":
        if cfg.banach is None:
            print("config error: banach: required for this check", file=sys.stderr)
            return EXIT_CONFIG
        L = scalar_fn(cfg.banach.L, "t")
        h = banach_find_h(problem, L, cfg.banach.steps, n=n)
        report = banach_check(problem, L, h if h is not None else problem.b - problem.a, n=n)
        record = {"check": "banach", **report.as_dict(), "h_found": h}
        print(json.dumps(record, indent=2))
        return EXIT_OK if h is not None else EXIT_UNSATISFIED
    if cfg.leray_schauder is None:
        print("config error: leray_schauder: required for this check", file=sys.stderr)
        return EXIT_CONFIG
    blk = cfg.leray_schauder
    report = ls_check(problem, scalar_fn(blk.F1, "t"), scalar_fn(blk.F2, "t"),
                      scalar_fn(blk.Lambda, "u"), blk.R_max, blk.steps, n=n)
    print(json.dumps({"check": "leray-schauder", **report.as_dict()}, indent=2))
    return EXIT_OK if report.satisfied else EXIT_UNSATISFIED


def cmd_validate(n_list, as_json: bool = False) -> int:
    rows = run_validation(tuple(n_list))
    if as_json:
        print(json.dumps(rows_as_dicts(rows), indent=2))
    else:
        print(format_table(rows))
    return EXIT_OK if all(r.passed for r in rows) else EXIT_UNSATISFIED


def _n_list(text: str) -> list[int]:
    try:
        values = [int(p) for p in text.split(",") if p.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")
    if not values or any(v < 8 for v in values):
        raise argparse.ArgumentTypeError("every n must be an integer >= 8")
    return values


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="psicaputo", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="solve a problem by Picard iteration")
    p.add_argument("--config", required=True, type=Path)
    p.add_argument("--out", required=True, type=Path)
    p.add_argument("--format", choices=("csv", "json"), default="csv")

    p = sub.add_parser("check", help="evaluate an existence-theorem hypothesis")
    p.add_argument("--config", required=True, type=Path)
    p.add_argument("--which", choices=("banach", "leray-schauder"), required=True)

    p = sub.add_parser("validate", help="convergence study on the built-in examples")
    p.add_argument("--n", type=_n_list, default=[128, 256, 512])
    p.add_argument("--json", action="store_true")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse usage errors are configuration errors
        return EXIT_CONFIG if exc.code else EXIT_OK
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")

    if args.command == "validate":
        return cmd_validate(args.n, args.json)
    try:
        cfg = load_config(args.config)
    except ConfigIOError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_IO
    except SchemaError as exc:
        for err in exc.errors:
            print(f"config error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    if args.command == "solve":
        return cmd_solve(cfg, args.out, args.format)
    return cmd_check(cfg, args.which)


if __name__ == "__main__":
    sys.exit(main())
