"""Volterra fixed-point solver for the nonlocal psi-Caputo boundary-value problem

    D^{alpha,psi} x(t) = f(t, x(t)),  t in [a, b],  2 < alpha < 3
    x(a) = x_a,  x'(a) = x1_a,  x(b) = K I^{alpha,psi} x(v),

and checkers for the contraction and a-priori-bound hypotheses that
guarantee a solution exists.

The boundary-value problem is equivalent to x = F(x) with

    F(x)(t) = I^alpha f(t, x(t)) + x_a + x1_a/psi'(a) (psi(t) - psi(a))
              + gamma_x (psi(t) - psi(a))^2,

where gamma_x is fixed by the nonlocal condition.
"""

from __future__ import annotations

import enum
import logging
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .fracops import Grid, SampledFunction, WeightMatrix, build_grid, frac_integral_weights
from .kernel import DomainError, PsiKernel, validate
from .special import gamma

log = logging.getLogger(__name__)

__all__ = [
    "SingularProblem",
    "MissingVNode",
    "Problem",
    "SolverConfig",
    "Status",
    "Solution",
    "Discretization",
    "BanachReport",
    "LSReport",
    "compute_N",
    "discretize",
    "compute_gamma",
    "apply_F",
    "picard_solve",
    "volterra_residual",
    "banach_check",
    "banach_find_h",
    "ls_check",
    "DIVERGENCE_LIMIT",
]

RhsFn = Callable[[np.ndarray, np.ndarray], np.ndarray]
ScalarFn = Callable[[np.ndarray], np.ndarray]

DIVERGENCE_LIMIT = 1e8
N_RELATIVE_TOL = 1e-10
PSI_PRIME_TOL = 1e-12


class SingularProblem(DomainError):
    """N vanishes, so the nonlocal condition cannot fix gamma_x."""


class MissingVNode(ValueError):
    pass


def _n_value(alpha: float, a: float, b: float, K: float, v: float, kernel: PsiKernel) -> float:
    psi_a, psi_b, psi_v = (float(kernel.psi(np.float64(p))) for p in (a, b, v))
    return 2.0 * K / gamma(3.0 + alpha) * (psi_v - psi_a) ** (2.0 + alpha) - (psi_b - psi_a) ** 2


@dataclass(frozen=True)
class Problem:
    alpha: float
    a: float
    b: float
    x_a: float
    x1_a: float
    K: float
    v: float
    f: RhsFn
    kernel: PsiKernel
    validation_nodes: int = field(default=1001, compare=False)

    def __post_init__(self):
        if not 2.0 < self.alpha < 3.0:
            raise DomainError(f"alpha must lie in (2, 3), got {self.alpha}")
        if not self.a < self.b:
            raise DomainError(f"need a < b, got [{self.a}, {self.b}]")
        if not self.a < self.v <= self.b:
            raise DomainError(f"v must lie in (a, b] = ({self.a}, {self.b}], got {self.v}")
        report = validate(self.kernel, self.a, self.b, self.validation_nodes)
        if not report.ok:
            first = report.first()
            raise DomainError(
                f"kernel {self.kernel.label} fails the {first.check} check at t={first.t:.6g}: "
                f"{first.detail}"
            )
        if not float(self.kernel.psi_prime(np.float64(self.a))) > PSI_PRIME_TOL:
            raise DomainError("psi'(a) must be positive")
        N = compute_N(self)
        scale = (self.psi_shift(self.b)) ** 2
        if not abs(N) > N_RELATIVE_TOL * scale:
            raise SingularProblem(
                f"N = {N:.3e} vanishes (|N| <= {N_RELATIVE_TOL:g} (psi(b)-psi(a))^2)"
            )

    def psi_shift(self, t):
        """psi(t) - psi(a)."""
        return self.kernel.psi(np.asarray(t, dtype=float)) - float(self.kernel.psi(np.float64(self.a)))

    @property
    def psi_prime_a(self) -> float:
        return float(self.kernel.psi_prime(np.float64(self.a)))

    @property
    def slope(self) -> float:
        """Coefficient x1_a / psi'(a) of the linear term."""
        return self.x1_a / self.psi_prime_a

    @property
    def N(self) -> float:
        return compute_N(self)


def compute_N(problem: Problem) -> float:
    """N = 2K/Gamma(3+alpha) (psi(v)-psi(a))^(2+alpha) - (psi(b)-psi(a))^2."""
    p = problem
    return _n_value(p.alpha, p.a, p.b, p.K, p.v, p.kernel)


@dataclass(frozen=True)
class SolverConfig:
    n: int = 512
    tol: float = 1e-10
    max_iter: int = 200
    damping: float = 1.0

    def __post_init__(self):
        if self.n < 8:
            raise ValueError(f"n must be >= 8, got {self.n}")
        if not self.tol > 0:
            raise ValueError(f"tol must be positive, got {self.tol}")
        if self.max_iter < 1:
            raise ValueError(f"max_iter must be >= 1, got {self.max_iter}")
        if not 0.0 < self.damping <= 1.0:
            raise ValueError(f"damping must lie in (0, 1], got {self.damping}")


class Status(str, enum.Enum):
    CONVERGED = "converged"
    NON_CONVERGENCE = "non_convergence"
    DIVERGED = "diverged"


@dataclass(frozen=True, eq=False)
class Discretization:
    """Grid and both weight matrices for one problem."""

    problem: Problem
    grid: Grid
    w_alpha: WeightMatrix
    w_2alpha: WeightMatrix

    @property
    def psi_values(self) -> np.ndarray:
        return self.w_alpha.s_values

    @property
    def shift(self) -> np.ndarray:
        s = self.psi_values
        return s - s[0]

    @property
    def iv(self) -> int:
        if self.grid.index_of_v is None:
            raise MissingVNode("grid has no node at v")
        return self.grid.index_of_v


def discretize(problem: Problem, n: int) -> Discretization:
    grid = build_grid(problem.a, problem.b, n, include=problem.v, kernel=problem.kernel)
    return Discretization(
        problem=problem,
        grid=grid,
        w_alpha=frac_integral_weights(problem.alpha, problem.kernel, grid),
        # built directly rather than by composing two order-alpha rules
        w_2alpha=frac_integral_weights(2.0 * problem.alpha, problem.kernel, grid),
    )


def _boundary_constant(problem: Problem, shift_v: float, shift_b: float) -> float:
    """The x_a and x1_a part of the numerator of gamma_x."""
    p = problem
    return (
        p.x_a * (1.0 - p.K / gamma(1.0 + p.alpha) * shift_v**p.alpha)
        + p.slope * (shift_b - p.K / gamma(2.0 + p.alpha) * shift_v ** (1.0 + p.alpha))
    )


def compute_gamma(problem: Problem, grid: Grid, x, Ia_f, I2a_f) -> float:
    """Quadratic coefficient gamma_x from I^alpha f at b and I^{2 alpha} f at v.

    ``x`` is accepted for symmetry with the functional it belongs to; gamma_x
    depends on x only through the integrals of f.
    """
    if grid.index_of_v is None:
        raise MissingVNode("grid has no node at v")
    Ia = Ia_f.values if isinstance(Ia_f, SampledFunction) else np.asarray(Ia_f)
    I2a = I2a_f.values if isinstance(I2a_f, SampledFunction) else np.asarray(I2a_f)
    s = grid.psi(problem.kernel)
    shift_v = s[grid.index_of_v] - s[0]
    shift_b = s[-1] - s[0]
    numerator = (
        Ia[-1]
        - problem.K * I2a[grid.index_of_v]
        + _boundary_constant(problem, shift_v, shift_b)
    )
    return float(numerator / compute_N(problem))


def _rhs(problem: Problem, t: np.ndarray, x: np.ndarray) -> np.ndarray:
    values = np.asarray(problem.f(t, x), dtype=float)
    return np.broadcast_to(values, t.shape)


@dataclass(frozen=True, eq=False)
class _FResult:
    values: np.ndarray
    gamma_x: float
    f_values: np.ndarray
    Ia_f: np.ndarray
    I2a_f: np.ndarray


def _apply(disc: Discretization, x: np.ndarray) -> _FResult:
    p = disc.problem
    t = disc.grid.nodes
    fx = _rhs(p, t, x)
    Ia_f = disc.w_alpha.apply(fx)
    I2a_f = disc.w_2alpha.apply(fx)
    g = compute_gamma(p, disc.grid, x, Ia_f, I2a_f)
    sh = disc.shift
    return _FResult(Ia_f + p.x_a + p.slope * sh + g * sh**2, g, fx, Ia_f, I2a_f)


def apply_F(problem: Problem, grid: Grid, weights_alpha: WeightMatrix,
            weights_2alpha: WeightMatrix, x) -> SampledFunction:
    """One evaluation of the Volterra functional on the grid."""
    disc = Discretization(problem, grid, weights_alpha, weights_2alpha)
    values = x.values if isinstance(x, SampledFunction) else np.asarray(x, dtype=float)
    return SampledFunction(grid, _apply(disc, values).values)


@dataclass(eq=False)
class Solution:
    grid: Grid
    psi_values: np.ndarray
    x_values: np.ndarray
    gamma_x: float
    iterations: int
    final_update_norm: float
    status: Status
    update_norms: list[float]
    volterra_residual: float = float("nan")
    bc_residuals: tuple[float, float, float] = (float("nan"),) * 3
    bc_residual_quadrature: float = float("nan")

    @property
    def converged(self) -> bool:
        return self.status is Status.CONVERGED

    @property
    def t(self) -> np.ndarray:
        return self.grid.nodes

    def diagnostics(self) -> dict:
        return {
            "status": self.status.value,
            "converged": self.converged,
            "gamma_x": self.gamma_x,
            "iterations": self.iterations,
            "final_update_norm": self.final_update_norm,
            "volterra_residual": self.volterra_residual,
            "bc_residuals": {
                "x_a": self.bc_residuals[0],
                "x1_a": self.bc_residuals[1],
                "nonlocal": self.bc_residuals[2],
            },
            "bc_residual_quadrature": self.bc_residual_quadrature,
            "n": self.grid.n,
        }


def initial_guess(problem: Problem, disc: Discretization) -> np.ndarray:
    return problem.x_a + problem.slope * disc.shift


def picard_solve(problem: Problem, config: SolverConfig = SolverConfig(),
                 x0: np.ndarray | None = None) -> Solution:
    """Damped Picard iteration x <- (1-w) x + w F(x) from the affine start."""
    disc = discretize(problem, config.n)
    x = initial_guess(problem, disc) if x0 is None else np.asarray(x0, dtype=float).copy()
    w = config.damping
    norms: list[float] = []
    status = Status.NON_CONVERGENCE
    result = None
    for _ in range(config.max_iter):
        result = _apply(disc, x)
        x_new = (1.0 - w) * x + w * result.values
        norm = float(np.max(np.abs(x_new - x)))
        norms.append(norm)
        x = x_new
        if not np.isfinite(norm) or norm > DIVERGENCE_LIMIT:
            status = Status.DIVERGED
            break
        if norm <= config.tol:
            status = Status.CONVERGED
            break
    log.debug("picard: %s after %d iterations, last update %.3e", status.value, len(norms), norms[-1])

    sol = Solution(
        grid=disc.grid,
        psi_values=disc.psi_values,
        x_values=x,
        gamma_x=result.gamma_x,
        iterations=len(norms),
        final_update_norm=norms[-1],
        status=status,
        update_norms=norms,
    )
    if status is not Status.DIVERGED:
        _fill_residuals(sol, disc)
    return sol


def _nonlocal_integral_at_v(disc: Discretization, res: _FResult) -> float:
    """I^alpha x(v) for x = F(x), using I^alpha I^alpha f = I^{2 alpha} f and
    the closed forms for the affine and quadratic parts."""
    p = disc.problem
    al = p.alpha
    sv = disc.shift[disc.iv]
    return (
        res.I2a_f[disc.iv]
        + p.x_a * sv**al / gamma(al + 1.0)
        + p.slope * sv ** (al + 1.0) / gamma(al + 2.0)
        + 2.0 * res.gamma_x * sv ** (al + 2.0) / gamma(al + 3.0)
    )


def _fill_residuals(sol: Solution, disc: Discretization) -> None:
    p = disc.problem
    x = sol.x_values
    res = _apply(disc, x)
    sol.volterra_residual = float(np.max(np.abs(x - res.values)))
    dx_a = float(np.gradient(x, disc.grid.nodes, edge_order=2)[0])
    sol.bc_residuals = (
        float(x[0] - p.x_a),
        dx_a - p.x1_a,
        float(x[-1] - p.K * _nonlocal_integral_at_v(disc, res)),
    )
    sol.bc_residual_quadrature = float(x[-1] - p.K * disc.w_alpha.apply(x)[disc.iv])


def volterra_residual(problem: Problem, solution: Solution) -> float:
    """sup_i |x_i - F(x)_i|, rebuilding the discretization from scratch."""
    disc = discretize(problem, solution.grid.n)
    if not np.array_equal(disc.grid.nodes, solution.grid.nodes):
        raise ValueError("solution grid does not match the problem's grid")
    return float(np.max(np.abs(solution.x_values - _apply(disc, solution.x_values).values)))


# ------------------------------------------------------------------ checkers

@dataclass(frozen=True)
class BanachReport:
    h: float
    bound: float
    contractive: bool

    def as_dict(self) -> dict:
        return {"h": self.h, "bound": self.bound, "contractive": self.contractive}


def _sample_nonneg(fn: ScalarFn, t: np.ndarray) -> np.ndarray:
    return np.broadcast_to(np.asarray(fn(t), dtype=float), t.shape)


def _contraction_profile(problem: Problem, L: ScalarFn, n: int) -> tuple[Grid, np.ndarray]:
    """Contraction expression at every node, using |K| and |N|."""
    disc = discretize(problem, n)
    Lt = _sample_nonneg(L, disc.grid.nodes)
    if np.any(Lt < 0):
        raise ValueError("Lipschitz function must be non-negative")
    IL = disc.w_alpha.apply(Lt)
    I2L_v = disc.w_2alpha.apply(Lt)[disc.iv]
    coupling = (IL[-1] + abs(problem.K) * I2L_v) / abs(compute_N(problem))
    return disc.grid, IL + coupling * disc.shift**2


def _sup_on(grid: Grid, profile: np.ndarray, h: float) -> float:
    # the node at a is always included
    mask = grid.nodes <= grid.a + h * (1.0 + 1e-12)
    return float(np.max(profile[mask]))


def banach_check(problem: Problem, L: ScalarFn, h: float, n: int = 512) -> BanachReport:
    """Evaluate the contraction bound on [a, a + h]."""
    if not 0.0 < h <= (problem.b - problem.a) * (1.0 + 1e-12):
        raise ValueError(f"h must lie in (0, b - a], got {h}")
    grid, profile = _contraction_profile(problem, L, n)
    bound = _sup_on(grid, profile, h)
    return BanachReport(h=float(h), bound=bound, contractive=bound < 1.0)


def banach_find_h(problem: Problem, L: ScalarFn, steps: int = 100, n: int = 512) -> float | None:
    """Largest h = (b-a) k/steps whose contraction bound is below one."""
    if steps < 2:
        raise ValueError(f"steps must be >= 2, got {steps}")
    grid, profile = _contraction_profile(problem, L, n)
    length = problem.b - problem.a
    best = None
    previous = -np.inf
    for k in range(1, steps + 1):
        h = length * k / steps
        bound = _sup_on(grid, profile, h)
        assert bound >= previous, "contraction bound must be nondecreasing in h"
        previous = bound
        if bound < 1.0:
            best = h
    return best


@dataclass(frozen=True)
class LSReport:
    omega1: float
    omega2: float
    constant: float
    R_found: float | None
    inequality_value_at_R: float
    lambda_nondecreasing: bool

    @property
    def satisfied(self) -> bool:
        return self.R_found is not None

    def as_dict(self) -> dict:
        return {
            "omega1": self.omega1,
            "omega2": self.omega2,
            "constant": self.constant,
            "R_found": self.R_found,
            "inequality_value_at_R": self.inequality_value_at_R,
            "lambda_nondecreasing": self.lambda_nondecreasing,
            "satisfied": self.satisfied,
        }


def _omega(disc: Discretization, Fi: ScalarFn) -> float:
    p = disc.problem
    vals = np.abs(_sample_nonneg(Fi, disc.grid.nodes))
    I = disc.w_alpha.apply(vals)
    I2_v = disc.w_2alpha.apply(vals)[disc.iv]
    shift_b = disc.shift[-1]
    return float(np.max(I) + (I[-1] + abs(p.K) * I2_v) * shift_b**2 / abs(compute_N(p)))


def ls_check(problem: Problem, F1: ScalarFn, F2: ScalarFn, Lambda: ScalarFn,
             R_max: float, steps: int = 1000, n: int = 512) -> LSReport:
    """Scan R in (0, R_max] for the a-priori bound of the Leray-Schauder argument.

    Left side: omega1 Lambda(R) + omega2 + |x_a| + |x1_a|/psi'(a) (psi(b)-psi(a))
    + |boundary constant| (psi(b)-psi(a))^2/|N|; the smallest R with left
    side <= R is reported.
    """
    if not R_max > 0:
        raise ValueError(f"R_max must be positive, got {R_max}")
    if steps < 1:
        raise ValueError(f"steps must be >= 1, got {steps}")
    p = problem
    disc = discretize(p, n)
    omega1 = _omega(disc, F1)
    omega2 = _omega(disc, F2)
    shift_b = disc.shift[-1]
    shift_v = disc.shift[disc.iv]
    constant = float(
        abs(p.x_a)
        + abs(p.x1_a) / p.psi_prime_a * shift_b
        + abs(_boundary_constant(p, shift_v, shift_b)) * shift_b**2 / abs(compute_N(p))
    )
    R = R_max * np.arange(1, steps + 1) / steps
    lam = np.broadcast_to(np.asarray(Lambda(R), dtype=float), R.shape)
    monotone = bool(np.all(np.diff(lam) >= 0))
    lhs = omega1 * lam + omega2 + constant
    ok = np.flatnonzero(lhs <= R) if monotone else np.array([], dtype=int)
    if ok.size:
        k = int(ok[0])
        return LSReport(omega1, omega2, constant, float(R[k]), float(lhs[k]), monotone)
    return LSReport(omega1, omega2, constant, None, float(lhs[-1]), monotone)
