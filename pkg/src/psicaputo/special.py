"""Real Gamma function and the one-parameter Mittag-Leffler function."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

__all__ = [
    "PoleError",
    "NoConvergence",
    "MLParams",
    "gamma",
    "log_gamma",
    "mittag_leffler",
]


class PoleError(ValueError):
    """Gamma evaluated at zero or a negative integer."""


class NoConvergence(RuntimeError):
    """Series did not reach the requested tolerance within the term cap."""


# Lanczos approximation, g = 7, nine coefficients.
_LANCZOS_G = 7.0
_LANCZOS_COEF = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)
_HALF_LOG_2PI = 0.5 * math.log(2.0 * math.pi)


def _lanczos_series(z: float) -> float:
    # z = x - 1, x >= 0.5
    acc = _LANCZOS_COEF[0]
    for i in range(1, len(_LANCZOS_COEF)):
        acc += _LANCZOS_COEF[i] / (z + i)
    return acc


def _sinpi(x: float) -> float:
    # sin(pi*x) with the argument reduced exactly to [-1, 1] first
    r = x - 2.0 * round(x / 2.0)
    return math.sin(math.pi * r)


def _is_pole(x: float) -> bool:
    return x <= 0.0 and x == math.floor(x)


def gamma(x: float) -> float:
    """Gamma function on the real line.

    Positive integers up to 171 are returned exactly via the factorial.
    Arguments below 0.5 go through the reflection formula.
    """
    x = float(x)
    if math.isnan(x):
        raise ValueError("gamma of nan")
    if _is_pole(x):
        raise PoleError(f"gamma has a pole at {x!r}")
    if x == math.floor(x) and x <= 171.0:
        return float(math.factorial(int(x) - 1))
    if x < 0.5:
        return math.pi / (_sinpi(x) * gamma(1.0 - x))
    if x > 140.0:
        return math.exp(log_gamma(x))
    z = x - 1.0
    t = z + _LANCZOS_G + 0.5
    return math.sqrt(2.0 * math.pi) * t ** (z + 0.5) * math.exp(-t) * _lanczos_series(z)


def log_gamma(x: float) -> float:
    """log Gamma(x) for x > 0."""
    x = float(x)
    if not x > 0.0:
        raise ValueError(f"log_gamma requires x > 0, got {x!r}")
    if x < 0.5:
        return math.log(math.pi / (_sinpi(x) * gamma(1.0 - x)))
    z = x - 1.0
    t = z + _LANCZOS_G + 0.5
    return _HALF_LOG_2PI + (z + 0.5) * math.log(t) - t + math.log(_lanczos_series(z))


@dataclass(frozen=True)
class MLParams:
    """Arguments of a Mittag-Leffler evaluation."""

    alpha: float
    z: float
    rel_tol: float = 2.0**-53
    max_terms: int = 1000

    def __post_init__(self) -> None:
        if not self.alpha > 0.0:
            raise ValueError(f"alpha must be > 0, got {self.alpha!r}")
        if not math.isfinite(self.z):
            raise ValueError(f"z must be finite, got {self.z!r}")
        if not (0.0 < self.rel_tol <= 1e-6):
            raise ValueError(f"rel_tol must lie in (0, 1e-6], got {self.rel_tol!r}")
        if self.max_terms < 10:
            raise ValueError(f"max_terms must be >= 10, got {self.max_terms!r}")


# Direct series loses relative accuracy through cancellation for large
# negative arguments; the supported range stops here.
ML_MIN_ARGUMENT = -5.0


def _ml_term(alpha: float, z: float, k: int) -> float:
    if k <= 30:
        return z**k / gamma(k * alpha + 1.0)
    # log space keeps z**k and Gamma(k*alpha+1) from overflowing separately
    sign = -1.0 if (z < 0.0 and k % 2 == 1) else 1.0
    return sign * math.exp(k * math.log(abs(z)) - log_gamma(k * alpha + 1.0))


def _ml_term_exact(alpha: float, z: float, k: int) -> Fraction:
    # z**k exactly, divided by the double-precision Gamma value exactly
    g = gamma(k * alpha + 1.0) if k * alpha + 1.0 <= 171.0 else math.inf
    if math.isinf(g):
        return Fraction(_ml_term(alpha, z, k))
    return Fraction(z) ** k / Fraction(g)


def _ml_scalar(p: MLParams) -> float:
    if p.z < ML_MIN_ARGUMENT:
        raise ValueError(
            f"z = {p.z!r} is below the supported range [{ML_MIN_ARGUMENT}, inf)"
        )
    if p.z == 0.0:
        return 1.0
    # Alternating terms for z < 0 cancel; summing them exactly leaves only
    # the Gamma rounding as error.
    exact = p.z < 0.0
    total = Fraction(1) if exact else None
    terms = [1.0]
    partial = 1.0
    small_in_a_row = 0
    for k in range(1, p.max_terms):
        if exact:
            exact_term = _ml_term_exact(p.alpha, p.z, k)
            total += exact_term
            term = float(exact_term)
            partial = float(total)
        else:
            term = _ml_term(p.alpha, p.z, k)
            terms.append(term)
            partial += term
        if abs(term) <= p.rel_tol * abs(partial):
            small_in_a_row += 1
            if small_in_a_row == 2:
                return float(total) if exact else math.fsum(terms)
        else:
            small_in_a_row = 0
    raise NoConvergence(
        f"Mittag-Leffler series for alpha={p.alpha}, z={p.z} "
        f"not converged after {p.max_terms} terms"
    )


def mittag_leffler(alpha, z, *, rel_tol: float = 2.0**-53, max_terms: int = 1000):
    """E_alpha(z) = sum_k z^k / Gamma(k alpha + 1) by direct summation.

    Accepts a scalar or an array for ``z``; arrays are evaluated elementwise.
    """
    if np.ndim(z) == 0:
        return _ml_scalar(MLParams(float(alpha), float(z), rel_tol, max_terms))
    z = np.asarray(z, dtype=float)
    out = np.empty_like(z)
    for idx, zi in np.ndenumerate(z):
        out[idx] = _ml_scalar(MLParams(float(alpha), float(zi), rel_tol, max_terms))
    return out
