"""JSON problem definitions.

A config is one JSON object::

    {
      "alpha": 2.5, "a": 0, "b": 1, "x_a": 0, "x1_a": 0,
      "K": "720/(gamma(4.5)*0.5^6)", "v": 0.5,
      "f": "gamma(4.5)*t",
      "kernel": {"name": "identity"},
      "n": 512, "tol": 1e-10, "max_iter": 200, "damping": 1.0,
      "banach": {"L": "0", "steps": 100},
      "leray_schauder": {"F1": "1", "F2": "0", "Lambda": "u", "R_max": 10, "steps": 1000}
    }

Numeric fields take a number or a constant expression. The kernel is
either a built-in (``identity``, ``log_shift`` with ``c``, ``power`` with
``p``, ``exponential`` with ``r``) or ``{"psi": ..., "psi_prime": ...}``
with ``psi_prime`` optional.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Any

import numpy as np

from .expr import ExprError, compile_expression, evaluate, free_variables, parse_expression
from .kernel import PsiKernel, make_builtin, make_from_expressions
from .solver import Problem, SolverConfig

__all__ = [
    "FieldError",
    "SchemaError",
    "ConfigIOError",
    "BanachBlock",
    "LSBlock",
    "ProblemConfig",
    "load_config",
    "parse_config",
    "build_problem",
    "build_kernel",
    "scalar_fn",
]


@dataclass(frozen=True)
class FieldError:
    field: str
    reason: str
    position: int | None = None

    def __str__(self) -> str:
        where = f" (position {self.position})" if self.position is not None else ""
        return f"{self.field}: {self.reason}{where}"


class SchemaError(ValueError):
    """All field-level problems found in a config."""

    def __init__(self, errors: list[FieldError]):
        self.errors = list(errors)
        super().__init__("; ".join(str(e) for e in self.errors))

    def has(self, field: str, reason: str | None = None) -> bool:
        return any(e.field == field and (reason is None or e.reason == reason)
                   for e in self.errors)


class ConfigIOError(OSError):
    pass


@dataclass(frozen=True)
class BanachBlock:
    L: str
    steps: int = 100


@dataclass(frozen=True)
class LSBlock:
    F1: str
    F2: str
    Lambda: str
    R_max: float
    steps: int = 1000


@dataclass(frozen=True)
class ProblemConfig:
    alpha: float
    a: float
    b: float
    x_a: float
    x1_a: float
    K: float
    v: float
    f: str
    kernel: dict
    n: int = 512
    tol: float = 1e-10
    max_iter: int = 200
    damping: float = 1.0
    banach: BanachBlock | None = None
    leray_schauder: LSBlock | None = None

    def to_dict(self) -> dict:
        d = asdict(self)
        for key in ("banach", "leray_schauder"):
            if d[key] is None:
                del d[key]
        return d

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @property
    def solver_config(self) -> SolverConfig:
        return SolverConfig(n=self.n, tol=self.tol, max_iter=self.max_iter, damping=self.damping)


class _Collector:
    def __init__(self, data: dict):
        self.data = data
        self.errors: list[FieldError] = []

    def fail(self, field: str, reason: str, position: int | None = None):
        self.errors.append(FieldError(field, reason, position))

    def number(self, obj: dict, key: str, prefix: str = "", default=None, required=True):
        name = prefix + key
        if key not in obj:
            if required:
                self.fail(name, "required")
            return default
        raw = obj[key]
        if isinstance(raw, bool):
            self.fail(name, "must be a number")
            return None
        if isinstance(raw, (int, float)):
            value = float(raw)
        elif isinstance(raw, str):
            try:
                tree = parse_expression(raw)
            except ExprError as exc:
                self.fail(name, str(exc), getattr(exc, "position", None))
                return None
            if free_variables(tree):
                self.fail(name, f"constant expression expected, found variables {sorted(free_variables(tree))}")
                return None
            try:
                value = evaluate(tree)
            except ExprError as exc:
                self.fail(name, str(exc))
                return None
        else:
            self.fail(name, "must be a number or constant expression")
            return None
        if not math.isfinite(value):
            self.fail(name, "must be finite")
            return None
        return value

    def integer(self, obj: dict, key: str, prefix: str = "", default=None, required=True):
        name = prefix + key
        if key not in obj:
            if required:
                self.fail(name, "required")
            return default
        raw = obj[key]
        if isinstance(raw, bool) or not isinstance(raw, (int, float)) or raw != int(raw):
            self.fail(name, "must be an integer")
            return None
        return int(raw)

    def expression(self, obj: dict, key: str, allowed: set[str], prefix: str = "",
                   required=True):
        name = prefix + key
        if key not in obj:
            if required:
                self.fail(name, "required")
            return None
        raw = obj[key]
        if isinstance(raw, (int, float)) and not isinstance(raw, bool):
            raw = repr(float(raw))
        if not isinstance(raw, str):
            self.fail(name, "must be an expression string")
            return None
        try:
            tree = parse_expression(raw)
        except ExprError as exc:
            self.fail(name, str(exc), getattr(exc, "position", None))
            return None
        extra = free_variables(tree) - allowed
        if extra:
            self.fail(name, f"unknown variable(s) {sorted(extra)}; allowed: {sorted(allowed)}")
            return None
        return raw


_KERNEL_PARAM = {"log_shift": "c", "power": "p", "exponential": "r"}


def _kernel_block(c: _Collector, raw: Any) -> dict | None:
    if not isinstance(raw, dict):
        c.fail("kernel", "must be an object")
        return None
    if "name" in raw:
        name = raw["name"]
        if name == "identity":
            return {"name": "identity"}
        if name not in _KERNEL_PARAM:
            c.fail("kernel.name", f"unknown kernel {name!r}")
            return None
        key = _KERNEL_PARAM[name]
        value = c.number(raw, key, prefix="kernel.")
        return None if value is None else {"name": name, key: value}
    if "psi" in raw:
        psi = c.expression(raw, "psi", {"t"}, prefix="kernel.")
        out = {"psi": psi}
        if "psi_prime" in raw:
            out["psi_prime"] = c.expression(raw, "psi_prime", {"t"}, prefix="kernel.")
        if any(v is None for v in out.values()):
            return None
        return out
    c.fail("kernel", "needs either 'name' or 'psi'")
    return None


def build_kernel(spec: dict, a: float | None = None) -> PsiKernel:
    if "name" in spec:
        name = spec["name"]
        param = spec.get(_KERNEL_PARAM.get(name, ""), None)
        return make_builtin(name, param, a=a)
    return make_from_expressions(spec["psi"], spec.get("psi_prime"))


def parse_config(data: Any) -> ProblemConfig:
    """Validate a decoded JSON object, reporting every bad field at once."""
    if not isinstance(data, dict):
        raise SchemaError([FieldError("<root>", "must be a JSON object")])
    c = _Collector(data)
    alpha = c.number(data, "alpha")
    a = c.number(data, "a")
    b = c.number(data, "b")
    x_a = c.number(data, "x_a")
    x1_a = c.number(data, "x1_a")
    K = c.number(data, "K")
    v = c.number(data, "v")
    f = c.expression(data, "f", {"t", "x"})
    kernel = _kernel_block(c, data["kernel"]) if "kernel" in data else c.fail("kernel", "required")
    n = c.integer(data, "n", default=512, required=False)
    tol = c.number(data, "tol", default=1e-10, required=False)
    max_iter = c.integer(data, "max_iter", default=200, required=False)
    damping = c.number(data, "damping", default=1.0, required=False)

    if alpha is not None and not 2.0 < alpha < 3.0:
        c.fail("alpha", "must be in (2,3)")
    if a is not None and b is not None and not a < b:
        c.fail("b", "must be greater than a")
    if v is not None and a is not None and b is not None and not a < v <= b:
        c.fail("v", "must be in (a,b]")
    if n is not None and n < 8:
        c.fail("n", "must be >= 8")
    if tol is not None and not tol > 0:
        c.fail("tol", "must be positive")
    if max_iter is not None and max_iter < 1:
        c.fail("max_iter", "must be >= 1")
    if damping is not None and not 0.0 < damping <= 1.0:
        c.fail("damping", "must be in (0,1]")

    banach = None
    if "banach" in data:
        blk = data["banach"]
        if not isinstance(blk, dict):
            c.fail("banach", "must be an object")
        else:
            L = c.expression(blk, "L", {"t"}, prefix="banach.")
            steps = c.integer(blk, "steps", prefix="banach.", default=100, required=False)
            if steps is not None and steps < 2:
                c.fail("banach.steps", "must be >= 2")
            if L is not None and steps is not None:
                banach = BanachBlock(L, steps)

    ls = None
    if "leray_schauder" in data:
        blk = data["leray_schauder"]
        if not isinstance(blk, dict):
            c.fail("leray_schauder", "must be an object")
        else:
            p = "leray_schauder."
            F1 = c.expression(blk, "F1", {"t"}, prefix=p)
            F2 = c.expression(blk, "F2", {"t"}, prefix=p)
            Lam = c.expression(blk, "Lambda", {"u"}, prefix=p)
            R_max = c.number(blk, "R_max", prefix=p)
            steps = c.integer(blk, "steps", prefix=p, default=1000, required=False)
            if R_max is not None and not R_max > 0:
                c.fail(p + "R_max", "must be positive")
            if steps is not None and steps < 1:
                c.fail(p + "steps", "must be >= 1")
            if None not in (F1, F2, Lam, R_max, steps):
                ls = LSBlock(F1, F2, Lam, R_max, steps)

    known = {"alpha", "a", "b", "x_a", "x1_a", "K", "v", "f", "kernel", "n", "tol",
             "max_iter", "damping", "banach", "leray_schauder"}
    for key in sorted(set(data) - known):
        c.fail(key, "unknown field")

    if c.errors:
        raise SchemaError(c.errors)
    return ProblemConfig(alpha, a, b, x_a, x1_a, K, v, f, kernel, n, tol, max_iter, damping,
                         banach, ls)


def load_config(path) -> ProblemConfig:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise ConfigIOError(f"cannot read config {path}: {exc}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError([FieldError("<root>", f"invalid JSON: {exc.msg}", exc.pos)]) from exc
    return parse_config(data)


def scalar_fn(source: str, var: str = "t"):
    """Vectorized one-variable function from an expression."""
    expr = compile_expression(source, allowed={var})

    def fn(values):
        values = np.asarray(values, dtype=float)
        return np.broadcast_to(expr(**{var: values}), values.shape)

    return fn


def build_problem(cfg: ProblemConfig) -> Problem:
    """Problem from a validated config; DomainError if it is ill-posed."""
    kernel = build_kernel(cfg.kernel, a=cfg.a)
    f_expr = compile_expression(cfg.f, allowed={"t", "x"})

    def f(t, x):
        return f_expr(t=t, x=x)

    return Problem(alpha=cfg.alpha, a=cfg.a, b=cfg.b, x_a=cfg.x_a, x1_a=cfg.x1_a,
                   K=cfg.K, v=cfg.v, f=f, kernel=kernel)

