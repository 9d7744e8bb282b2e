"""Solver for nonlinear psi-Caputo boundary-value problems of order alpha in (2, 3)
with a nonlocal fractional-integral boundary condition."""

from .fracops import (
    Grid,
    SampledFunction,
    WeightMatrix,
    build_grid,
    caputo_derivative,
    frac_integral,
    frac_integral_apply,
    frac_integral_weights,
    psi_bracket_derivative,
)
from .kernel import PsiKernel, make_builtin, make_from_expressions, validate
from .solver import (
    Problem,
    Solution,
    SolverConfig,
    Status,
    apply_F,
    banach_check,
    banach_find_h,
    compute_gamma,
    compute_N,
    ls_check,
    picard_solve,
    volterra_residual,
)
from .special import gamma, mittag_leffler

__version__ = "0.1.0"
