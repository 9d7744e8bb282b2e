"""Contraction bound and Leray-Schauder radius for both closed-form examples,
plus the largest constant Lipschitz level for which the contraction holds.

    python3 scripts/check_hypotheses.py
"""

import json

import numpy as np

from psicaputo.examples import EXAMPLES, VALIDATION_KERNELS
from psicaputo.solver import banach_check, banach_find_h, ls_check


def critical_lipschitz(problem, lo=0.0, hi=100.0, iters=60) -> float:
    # bound is linear in L, so bisection on a constant level is exact enough
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if banach_check(problem, lambda t: mid + 0 * t, problem.b - problem.a).contractive:
            lo = mid
        else:
            hi = mid
    return lo


def main() -> None:
    out = []
    for kname, make in VALIDATION_KERNELS.items():
        for ename, build in EXAMPLES.items():
            ex = build(make())
            p = ex.problem
            rep = banach_check(p, ex.lipschitz, p.b - p.a)
            ls = ls_check(p, ex.F1, ex.F2, ex.Lambda, R_max=100.0, steps=10000)
            out.append({
                "example": ename,
                "kernel": kname,
                "K": p.K,
                "N": p.N,
                "banach": rep.as_dict(),
                "h_found": banach_find_h(p, ex.lipschitz, 100),
                "critical_constant_L": critical_lipschitz(p),
                "leray_schauder": ls.as_dict(),
            })
    print(json.dumps(out, indent=2, default=lambda v: float(v) if isinstance(v, np.floating) else str(v)))


if __name__ == "__main__":
    main()
