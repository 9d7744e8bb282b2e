import math

import numpy as np
import pytest

from psicaputo.kernel import (
    DomainError,
    central_difference,
    make_builtin,
    make_from_expressions,
    validate,
)


def test_builtin_values():
    k = make_builtin("identity")
    assert k.psi(2.0) == 2.0 and k.psi_prime(2.0) == 1.0
    k = make_builtin("log_shift", 1.0)
    assert k.psi(0.0) == 0.0 and k.psi_prime(0.0) == 1.0
    k = make_builtin("power", 2.0)
    assert k.psi(3.0) == 9.0 and k.psi_prime(3.0) == 6.0
    k = make_builtin("exponential", 2.0)
    assert k.psi(0.5) == pytest.approx(math.e)
    assert k.psi_prime(0.5) == pytest.approx(2 * math.e)


@pytest.mark.parametrize("name,param,a", [
    ("log_shift", 1.0, -1.0),
    ("log_shift", -2.0, 1.0),
    ("power", 0.0, 0.0),
    ("power", 1.5, -0.5),
    ("exponential", 0.0, 0.0),
    ("power", None, 0.0),
    ("cubic", 1.0, 0.0),
])
def test_builtin_domain_errors(name, param, a):
    with pytest.raises(DomainError):
        make_builtin(name, param, a=a)


@pytest.mark.parametrize("name,param,a,b", [
    ("identity", None, -2.0, 3.0),
    ("log_shift", 1.0, 0.0, 4.0),
    ("log_shift", 0.0, 1.0, 3.0),
    ("power", 2.5, 0.5, 2.0),
    ("exponential", -1.3, -1.0, 1.0),
])
def test_builtin_derivative_matches_difference(name, param, a, b):
    k = make_builtin(name, param, a=a)
    t = np.random.default_rng(7).uniform(a, b, 50)
    exact = k.psi_prime(t)
    approx = central_difference(k.psi, t)
    assert np.all(np.abs(exact - approx) <= 1e-6 * (1 + np.abs(exact)))


def test_expression_kernels():
    k = make_from_expressions("t")
    assert k.psi_prime(1.0) == pytest.approx(1.0, abs=1e-8)
    k = make_from_expressions("t^2+t", "2*t+1")
    assert k.psi_prime(3.0) == 7.0
    k = make_from_expressions("ln(1+t)")
    assert k.psi_prime(1.0) == pytest.approx(0.5, abs=1e-8)
    # arrays in, arrays out, constants broadcast
    k = make_from_expressions("t", "1")
    assert k.psi_prime(np.zeros(4)).shape == (4,)


def test_validate_identity_ok():
    assert validate(make_builtin("identity"), 0.0, 1.0, 11).ok
    assert validate(make_builtin("identity"), -50.0, 3.0).ok


def test_validate_sin_fails_near_half_pi():
    report = validate(make_from_expressions("sin(t)"), 0.0, 4.0, 41)
    assert not report.ok
    first = report.first()
    assert first.check == "positive_derivative"
    assert abs(first.t - math.pi / 2) < 0.1
    checks = {v.check for v in report.violations}
    assert "increasing" in checks


def test_validate_decreasing():
    report = validate(make_from_expressions("-t"), 0.0, 1.0, 5)
    mono = [v for v in report.violations if v.check == "increasing"][0]
    assert mono.index == 1


def test_validate_nonfinite():
    report = validate(make_from_expressions("ln(t)", "1/t"), 0.0, 1.0, 5)
    assert not report.ok


def test_validate_preconditions():
    with pytest.raises(DomainError):
        validate(make_builtin("identity"), 1.0, 0.0, 5)
    with pytest.raises(DomainError):
        validate(make_builtin("identity"), 0.0, 1.0, 2)
