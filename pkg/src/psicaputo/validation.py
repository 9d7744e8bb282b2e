"""Convergence study of the solver on the built-in closed-form examples."""

from __future__ import annotations

import math
import time
from dataclasses import asdict, dataclass

import numpy as np

from .examples import EXAMPLES, VALIDATION_KERNELS
from .solver import SolverConfig, picard_solve

# Errors below this are rounding, not discretization error; an observed
# order between two such errors carries no information.
ROUNDING_FLOOR = 1e-12
MAX_ERROR = 1e-3
MIN_ORDER = 1.5


@dataclass
class ValidationRow:
    example: str
    kernel: str
    n: int
    max_error: float
    order: float | None
    iterations: int
    status: str
    bc_residual: float
    seconds: float

    @property
    def passed(self) -> bool:
        ok = self.status == "converged" and self.max_error <= MAX_ERROR
        if self.order is not None and not math.isnan(self.order):
            ok = ok and self.order >= MIN_ORDER
        return ok


def observed_order(coarse: float, fine: float, ratio: float = 2.0) -> float:
    """log_ratio(coarse/fine); nan when both errors sit at the rounding floor."""
    if coarse <= ROUNDING_FLOOR and fine <= ROUNDING_FLOOR:
        return float("nan")
    if fine == 0.0:
        return float("inf")
    return math.log(coarse / fine) / math.log(ratio)


def run_case(example: str, kernel: str, n: int, tol: float = 1e-10) -> tuple[ValidationRow, object]:
    ex = EXAMPLES[example](VALIDATION_KERNELS[kernel]())
    start = time.perf_counter()
    sol = picard_solve(ex.problem, SolverConfig(n=n, tol=tol))
    seconds = time.perf_counter() - start
    err = float(np.max(np.abs(sol.x_values - ex.exact(sol.t))))
    row = ValidationRow(example, kernel, n, err, None, sol.iterations, sol.status.value,
                        abs(sol.bc_residuals[2]), seconds)
    return row, sol


def run_validation(n_list=(128, 256, 512), tol: float = 1e-10) -> list[ValidationRow]:
    rows: list[ValidationRow] = []
    for example in EXAMPLES:
        for kernel in VALIDATION_KERNELS:
            previous = None
            for n in n_list:
                row, _ = run_case(example, kernel, n, tol)
                if previous is not None:
                    row.order = observed_order(previous.max_error, row.max_error, n / previous.n)
                rows.append(row)
                previous = row
    return rows


def format_table(rows: list[ValidationRow]) -> str:
    header = f"{'example':<16}{'kernel':<14}{'n':>6}{'max_error':>12}{'order':>8}{'iter':>6}  status"
    lines = [header, "-" * len(header)]
    for r in rows:
        if r.order is None:
            order = "-"
        elif math.isnan(r.order):
            order = "exact"
        else:
            order = f"{r.order:.2f}"
        lines.append(
            f"{r.example:<16}{r.kernel:<14}{r.n:>6}{r.max_error:>12.3e}{order:>8}"
            f"{r.iterations:>6}  {r.status}{'' if r.passed else '  FAIL'}"
        )
    return "\n".join(lines)


def rows_as_dicts(rows: list[ValidationRow]) -> list[dict]:
    out = []
    for r in rows:
        d = asdict(r)
        if d["order"] is not None and math.isnan(d["order"]):
            d["order"] = None
        d["passed"] = r.passed
        out.append(d)
    return out
