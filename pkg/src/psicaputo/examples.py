"""Two boundary-value problems with closed-form solutions, on [0, 1] with
alpha = 2.5 and v = 0.5, for an arbitrary kernel.

* ``power``: D x = Gamma(4.5) (psi(t) - psi(0)), x(0) = x'(0) = 0,
  solution x = (psi(t) - psi(0))^3.5.
* ``mittag_leffler``: D x = x, x(0) = 1, x'(0) = 0,
  solution x = E_2.5((psi(t) - psi(0))^2.5).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .kernel import PsiKernel, make_builtin
from .solver import Problem
from .special import gamma, mittag_leffler

ALPHA = 2.5
A, B, V = 0.0, 1.0, 0.5


@dataclass(frozen=True)
class BuiltinExample:
    name: str
    problem: Problem
    exact: Callable[[np.ndarray], np.ndarray]
    lipschitz: Callable[[np.ndarray], np.ndarray]
    # growth bound |f(t,x)| <= F1(t) Lambda(|x|) + F2(t)
    F1: Callable[[np.ndarray], np.ndarray]
    F2: Callable[[np.ndarray], np.ndarray]
    Lambda: Callable[[np.ndarray], np.ndarray]


def _shift(kernel: PsiKernel):
    psi0 = float(kernel.psi(np.float64(A)))
    return lambda t: kernel.psi(np.asarray(t, dtype=float)) - psi0


def power_example(kernel: PsiKernel) -> BuiltinExample:
    sh = _shift(kernel)
    g45 = gamma(4.5)
    K = 720.0 * float(sh(B)) ** 3.5 / (g45 * float(sh(V)) ** 6)
    problem = Problem(
        alpha=ALPHA, a=A, b=B, x_a=0.0, x1_a=0.0, K=K, v=V,
        f=lambda t, x: g45 * sh(t),
        kernel=kernel,
    )
    zero = lambda t: np.zeros_like(np.asarray(t, dtype=float))  # noqa: E731
    return BuiltinExample(
        name="power",
        problem=problem,
        exact=lambda t: sh(t) ** 3.5,
        lipschitz=zero,
        F1=zero,
        F2=lambda t: g45 * np.abs(sh(t)),
        Lambda=lambda u: np.asarray(u, dtype=float),
    )


def mittag_leffler_example(kernel: PsiKernel) -> BuiltinExample:
    sh = _shift(kernel)
    K = mittag_leffler(ALPHA, float(sh(B)) ** ALPHA) / (
        mittag_leffler(ALPHA, float(sh(V)) ** ALPHA) - 1.0
    )
    problem = Problem(
        alpha=ALPHA, a=A, b=B, x_a=1.0, x1_a=0.0, K=K, v=V,
        f=lambda t, x: x,
        kernel=kernel,
    )
    one = lambda t: np.ones_like(np.asarray(t, dtype=float))  # noqa: E731
    return BuiltinExample(
        name="mittag_leffler",
        problem=problem,
        exact=lambda t: mittag_leffler(ALPHA, sh(t) ** ALPHA),
        lipschitz=one,
        F1=one,
        F2=lambda t: np.zeros_like(np.asarray(t, dtype=float)),
        Lambda=lambda u: np.asarray(u, dtype=float),
    )


EXAMPLES = {"power": power_example, "mittag_leffler": mittag_leffler_example}

VALIDATION_KERNELS = {
    "identity": lambda: make_builtin("identity"),
    "log_shift(1)": lambda: make_builtin("log_shift", 1.0, a=A),
}
