"""Discrete psi-fractional integrals and the psi-Caputo derivative.

The integral

    I^{alpha,psi} x(t) = 1/Gamma(alpha) int_a^t psi'(tau) (psi(t) - psi(tau))^(alpha-1) x(tau) dtau

becomes, after the change of variable s = psi(tau), a Riemann-Liouville
integral in s. The weights below interpolate x linearly in s on each panel
and integrate the factor (s_i - s)^(alpha-1) exactly (product trapezoid).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .kernel import DomainError, PsiKernel
from .special import gamma

__all__ = [
    "GridMismatch",
    "GridTooCoarse",
    "Grid",
    "SampledFunction",
    "WeightMatrix",
    "build_grid",
    "sample",
    "frac_integral_weights",
    "frac_integral_apply",
    "frac_integral",
    "caputo_derivative",
    "psi_bracket_derivative",
]


class GridMismatch(ValueError):
    pass


class GridTooCoarse(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class Grid:
    nodes: np.ndarray
    index_of_v: int | None = None
    s_values: np.ndarray | None = None

    @property
    def n(self) -> int:
        """Number of intervals."""
        return len(self.nodes) - 1

    @property
    def a(self) -> float:
        return float(self.nodes[0])

    @property
    def b(self) -> float:
        return float(self.nodes[-1])

    def psi(self, kernel: PsiKernel) -> np.ndarray:
        if self.s_values is not None:
            return self.s_values
        return _psi_values(kernel, self.nodes)


def _psi_values(kernel: PsiKernel, nodes: np.ndarray) -> np.ndarray:
    s = np.asarray(kernel.psi(nodes), dtype=float)
    if not np.all(np.isfinite(s)):
        raise DomainError(f"kernel {kernel.label} is not finite on the grid")
    if not np.all(np.diff(s) > 0):
        raise DomainError(f"kernel {kernel.label} is not strictly increasing on the grid")
    return s


def build_grid(a: float, b: float, n: int, include: float | None = None,
               kernel: PsiKernel | None = None) -> Grid:
    """Uniform grid of n intervals on [a, b].

    When ``include`` is given, the node nearest to it is moved onto it
    (the endpoint a is never moved), so the point is an exact node.
    """
    if not a < b:
        raise DomainError(f"need a < b, got [{a}, {b}]")
    if n < 4:
        raise DomainError(f"need n >= 4 intervals, got {n}")
    nodes = np.linspace(a, b, n + 1)
    index_of_v = None
    if include is not None:
        v = float(include)
        if not a < v <= b:
            raise DomainError(f"marked point {v} outside ({a}, {b}]")
        hit = np.flatnonzero(nodes == v)
        if hit.size:
            index_of_v = int(hit[0])
        else:
            # candidates exclude a and b, keeping both endpoints in place
            k = 1 + int(np.argmin(np.abs(nodes[1:-1] - v)))
            nodes[k] = v
            index_of_v = k
    s = _psi_values(kernel, nodes) if kernel is not None else None
    return Grid(nodes=nodes, index_of_v=index_of_v, s_values=s)


@dataclass(frozen=True, eq=False)
class SampledFunction:
    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.shape != self.grid.nodes.shape:
            raise GridMismatch(
                f"{values.shape[0] if values.ndim else 1} values for "
                f"{len(self.grid.nodes)} nodes"
            )
        if not np.all(np.isfinite(values)):
            raise ValueError("sampled values must be finite")
        object.__setattr__(self, "values", values)


def sample(grid: Grid, fn) -> SampledFunction:
    values = np.asarray(fn(grid.nodes), dtype=float)
    return SampledFunction(grid, np.broadcast_to(values, grid.nodes.shape).copy())


def _pow_diff(A: np.ndarray, B: np.ndarray, d: np.ndarray, p: float) -> np.ndarray:
    # A**p - B**p with A - B = d >= 0, written to avoid cancellation
    with np.errstate(divide="ignore"):
        return A**p * -np.expm1(p * np.log1p(-d / A))


@dataclass(frozen=True, eq=False)
class WeightMatrix:
    order: float
    grid: Grid
    s_values: np.ndarray
    entries: np.ndarray  # dense lower-triangular (n+1, n+1)

    def apply(self, samples) -> np.ndarray:
        if isinstance(samples, SampledFunction):
            if samples.grid is not self.grid and not np.array_equal(
                samples.grid.nodes, self.grid.nodes
            ):
                raise GridMismatch("samples live on a different grid")
            values = samples.values
        else:
            values = np.asarray(samples, dtype=float)
        if values.shape[-1:] != (len(self.grid.nodes),):
            raise GridMismatch(
                f"expected {len(self.grid.nodes)} samples, got {values.shape[-1:]}"
            )
        return values @ self.entries.T

    def row(self, i: int) -> np.ndarray:
        return self.entries[i, : i + 1]


def frac_integral_weights(alpha: float, kernel: PsiKernel, grid: Grid) -> WeightMatrix:
    """Product-trapezoid weights for I^{alpha,psi} at every grid node."""
    if not alpha > 0:
        raise DomainError(f"order must be positive, got {alpha}")
    s = grid.psi(kernel)
    n = len(s) - 1
    d = np.diff(s)[None, :]                      # panel widths, (1, n)
    S = s[:, None] - s[None, :]                  # s_i - s_j, (n+1, n+1)
    A = S[:, :-1]                                # s_i - s_j      (panel left)
    B = S[:, 1:]                                 # s_i - s_{j+1}  (panel right)
    active = np.arange(n)[None, :] < np.arange(n + 1)[:, None]
    A = np.where(active, A, 1.0)
    B = np.where(active, B, 0.0)
    B = np.maximum(B, 0.0)

    dA = _pow_diff(A, B, d, alpha)               # A^a - B^a
    dA1 = _pow_diff(A, B, d, alpha + 1.0)        # A^(a+1) - B^(a+1)
    scale = 1.0 / (d * gamma(alpha))
    # int_B^A u^(a-1) (u - B) du  and  int_B^A u^(a-1) (A - u) du
    left = (dA1 / (alpha + 1.0) - B * dA / alpha) * scale
    right = (A * dA / alpha - dA1 / (alpha + 1.0)) * scale
    left = np.where(active, left, 0.0)
    right = np.where(active, right, 0.0)

    W = np.zeros((n + 1, n + 1))
    W[:, :-1] += left
    W[:, 1:] += right
    return WeightMatrix(order=float(alpha), grid=grid, s_values=s, entries=W)


def frac_integral_apply(weights: WeightMatrix, samples) -> SampledFunction:
    return SampledFunction(weights.grid, weights.apply(samples))


def frac_integral(alpha: float, kernel: PsiKernel, grid: Grid, samples) -> SampledFunction:
    return frac_integral_apply(frac_integral_weights(alpha, kernel, grid), samples)


def caputo_derivative(alpha: float, kernel: PsiKernel, grid: Grid, g) -> SampledFunction:
    """psi-Caputo derivative of order alpha in (2, 3).

    ``g`` holds samples of the third bracket derivative x^{[3]}_psi; the
    result is I^{3-alpha,psi} g.
    """
    if not 2.0 < alpha < 3.0:
        raise DomainError(f"Caputo order must lie in (2, 3), got {alpha}")
    return frac_integral(3.0 - alpha, kernel, grid, g)


def psi_bracket_derivative(kernel: PsiKernel, grid: Grid, samples, k: int) -> SampledFunction:
    """k-fold application of (1/psi'(t)) d/dt by finite differences.

    Second-order differences (one-sided at the two boundary nodes).
    """
    if k not in (1, 2, 3):
        raise ValueError(f"bracket derivative order must be 1, 2 or 3, got {k}")
    t = grid.nodes
    if len(t) < 2 * k + 1:
        raise GridTooCoarse(f"order {k} needs at least {2 * k + 1} nodes, got {len(t)}")
    values = samples.values if isinstance(samples, SampledFunction) else np.asarray(samples, float)
    if values.shape != t.shape:
        raise GridMismatch(f"expected {len(t)} samples, got {values.shape}")
    dpsi = np.asarray(kernel.psi_prime(t), dtype=float)
    out = values
    for _ in range(k):
        out = np.gradient(out, t, edge_order=2) / dpsi
    return SampledFunction(grid, out)
