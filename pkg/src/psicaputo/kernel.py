"""The kernel function psi (and its derivative) that selects the flavour of
fractional calculus: psi(t) = t gives Riemann-Liouville/Caputo operators,
psi(t) = ln(c + t) Hadamard-type ones."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .expr import CompiledExpression, EvalError, compile_expression

__all__ = [
    "DomainError",
    "PsiKernel",
    "Violation",
    "KernelReport",
    "make_builtin",
    "make_from_expressions",
    "validate",
    "central_difference",
    "BUILTIN_KERNELS",
]

ArrayFn = Callable[[np.ndarray], np.ndarray]


class DomainError(ValueError):
    pass


@dataclass(frozen=True)
class PsiKernel:
    psi: ArrayFn
    psi_prime: ArrayFn
    label: str
    params: dict = field(default_factory=dict, compare=False)

    def __call__(self, t):
        return self.psi(t)

    def derivative(self, t):
        return self.psi_prime(t)


def central_difference(fn: ArrayFn, t) -> np.ndarray:
    t = np.asarray(t, dtype=float)
    h = np.maximum(1e-6, 1e-6 * np.abs(t))
    return (fn(t + h) - fn(t - h)) / (2.0 * h)


BUILTIN_KERNELS = ("identity", "log_shift", "power", "exponential")


def make_builtin(name: str, param: float | None = None, a: float | None = None) -> PsiKernel:
    """Built-in kernel with an exact analytic derivative.

    ``param`` is c for log_shift, p for power and r for exponential. When
    the left endpoint ``a`` is given the domain preconditions are checked
    against it.
    """
    if name == "identity":
        return PsiKernel(
            psi=lambda t: np.asarray(t, dtype=float) * 1.0,
            psi_prime=lambda t: np.ones_like(np.asarray(t, dtype=float)),
            label="identity",
        )
    if param is None:
        raise DomainError(f"kernel {name!r} needs a parameter")
    param = float(param)
    if name == "log_shift":
        c = param
        if a is not None and not c + a > 0:
            raise DomainError(f"log_shift requires c + a > 0, got c={c}, a={a}")
        return PsiKernel(
            psi=lambda t: np.log(c + np.asarray(t, dtype=float)),
            psi_prime=lambda t: 1.0 / (c + np.asarray(t, dtype=float)),
            label=f"log_shift({c:g})",
            params={"c": c},
        )
    if name == "power":
        p = param
        if not p > 0:
            raise DomainError(f"power requires p > 0, got {p}")
        if a is not None and a < 0:
            raise DomainError(f"power requires a >= 0, got a={a}")
        return PsiKernel(
            psi=lambda t: np.asarray(t, dtype=float) ** p,
            psi_prime=lambda t: p * np.asarray(t, dtype=float) ** (p - 1.0),
            label=f"power({p:g})",
            params={"p": p},
        )
    if name == "exponential":
        r = param
        if r == 0:
            raise DomainError("exponential requires r != 0")
        return PsiKernel(
            psi=lambda t: np.exp(r * np.asarray(t, dtype=float)),
            psi_prime=lambda t: r * np.exp(r * np.asarray(t, dtype=float)),
            label=f"exponential({r:g})",
            params={"r": r},
        )
    raise DomainError(f"unknown kernel {name!r}; choose from {', '.join(BUILTIN_KERNELS)}")


def _as_array_fn(expr: CompiledExpression) -> ArrayFn:
    def fn(t):
        t = np.asarray(t, dtype=float)
        return np.broadcast_to(expr(t=t), t.shape).astype(float)

    return fn


def make_from_expressions(psi_expr: str | CompiledExpression,
                          psi_prime_expr: str | CompiledExpression | None = None) -> PsiKernel:
    """Kernel from expression strings in the variable ``t``.

    Without a derivative expression psi' is a central difference of psi.
    """
    if isinstance(psi_expr, str):
        psi_expr = compile_expression(psi_expr, allowed={"t"})
    psi = _as_array_fn(psi_expr)
    if psi_prime_expr is None:
        psi_prime = lambda t: central_difference(psi, t)  # noqa: E731
        label = f"expr({psi_expr.source})"
    else:
        if isinstance(psi_prime_expr, str):
            psi_prime_expr = compile_expression(psi_prime_expr, allowed={"t"})
        psi_prime = _as_array_fn(psi_prime_expr)
        label = f"expr({psi_expr.source}; {psi_prime_expr.source})"
    return PsiKernel(psi=psi, psi_prime=psi_prime, label=label)


@dataclass(frozen=True)
class Violation:
    check: str  # "finite", "increasing" or "positive_derivative"
    index: int
    t: float
    detail: str


@dataclass(frozen=True)
class KernelReport:
    ok: bool
    violations: tuple[Violation, ...] = ()

    def first(self) -> Violation | None:
        if not self.violations:
            return None
        return min(self.violations, key=lambda v: v.index)

    def __bool__(self) -> bool:
        return self.ok


def validate(kernel: PsiKernel, a: float, b: float, m: int = 1001) -> KernelReport:
    """Sample psi and psi' on m equispaced nodes of [a, b].

    Records the first violating node of each check: finite values, strictly
    increasing psi, psi' > 0.
    """
    if not a < b:
        raise DomainError(f"need a < b, got [{a}, {b}]")
    if m < 3:
        raise DomainError(f"need at least 3 validation nodes, got {m}")
    t = np.linspace(a, b, m)
    violations: list[Violation] = []
    try:
        s = np.asarray(kernel.psi(t), dtype=float)
        ds = np.asarray(kernel.psi_prime(t), dtype=float)
    except EvalError as exc:
        return KernelReport(False, (Violation("finite", 0, float(a), str(exc)),))

    bad = np.flatnonzero(~(np.isfinite(s) & np.isfinite(ds)))
    if bad.size:
        i = int(bad[0])
        violations.append(Violation("finite", i, float(t[i]),
                                    f"psi={s[i]!r}, psi'={ds[i]!r}"))
    steps = np.diff(s)
    bad = np.flatnonzero(~(steps > 0))
    if bad.size:
        i = int(bad[0]) + 1
        violations.append(Violation("increasing", i, float(t[i]),
                                    f"psi({t[i]:.6g})={s[i]:.6g} <= psi({t[i-1]:.6g})={s[i-1]:.6g}"))
    bad = np.flatnonzero(~(ds > 0))
    if bad.size:
        i = int(bad[0])
        violations.append(Violation("positive_derivative", i, float(t[i]),
                                    f"psi'({t[i]:.6g})={ds[i]:.6g}"))
    return KernelReport(not violations, tuple(violations))
