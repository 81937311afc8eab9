import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from nonneutral import (
    MonotonicityViolation,
    NoBracket,
    NoConvergence,
    SolveConfig,
    bisect_root,
    expand_bracket,
    fixed_point_monotone,
    gaussian_lower_integral,
    gaussian_upper_integral,
    golden_max,
)


def test_config_validation():
    with pytest.raises(ValueError):
        SolveConfig(abs_tol=0)
    with pytest.raises(ValueError):
        SolveConfig(max_iter=0)
    with pytest.raises(ValueError):
        SolveConfig(bracket_expand=1.0)


def test_bisect_linear_and_sqrt2():
    assert bisect_root(lambda x: x - 1, 0, 2) == pytest.approx(1.0, abs=1e-10)
    assert abs(bisect_root(lambda x: x * x - 2, 0, 2) - math.sqrt(2)) <= 1e-10


def test_bisect_swapped_endpoints_and_exact_zero():
    assert bisect_root(lambda x: x - 1, 2, 0) == pytest.approx(1.0, abs=1e-10)
    assert bisect_root(lambda x: x, 0.0, 3.0) == 0.0


def test_bisect_errors():
    with pytest.raises(NoBracket):
        bisect_root(lambda x: x * x + 1, -1, 1)
    with pytest.raises(NoConvergence):
        bisect_root(lambda x: x - 0.3, 0, 1, SolveConfig(abs_tol=1e-12, max_iter=5))


def test_bisect_stays_in_bracket():
    seen = []

    def f(x):
        seen.append(x)
        return x ** 3 - 0.2

    bisect_root(f, 0, 1)
    assert all(0 <= x <= 1 for x in seen)


def test_expand_bracket():
    lo, hi = expand_bracket(lambda x: x - 100, 0.0, 1.0)
    assert lo <= 100 <= hi
    lo, hi = expand_bracket(lambda x: x + 50, 0.0, -1.0)
    assert lo <= -50 <= hi
    with pytest.raises(NoBracket):
        expand_bracket(lambda x: 1.0, 0.0, 1.0)


def test_golden_examples():
    x, fx = golden_max(lambda t: -(t - 3) ** 2, 0, 10)
    assert abs(x - 3) <= 1e-8 and fx == pytest.approx(0, abs=1e-15)
    x, fx = golden_max(lambda t: math.log(t) - t, 0.1, 5, SolveConfig(abs_tol=1e-7))
    assert abs(x - 1) < 1e-6 and abs(fx + 1) < 1e-12


def test_golden_boundary_max():
    x, fx = golden_max(lambda t: t, 0, 2)
    assert x == 2 and fx == 2


@settings(max_examples=60, deadline=None)
@given(st.floats(-50, 50), st.floats(0.1, 10))
def test_golden_recovers_quadratic_vertex(v, a):
    x, _ = golden_max(lambda t: -a * (t - v) ** 2, v - 37.3, v + 61.1, SolveConfig(abs_tol=1e-6))
    # values are exact enough near the vertex for the bracket to carry the error
    assert abs(x - v) <= 1e-5


def test_gaussian_half_mass_and_tail():
    half = gaussian_upper_integral(5, 2, 5)
    assert abs(half / (math.sqrt(8 * math.pi) / 2) - 1) < 1e-10
    assert gaussian_upper_integral(5, 2, 1e6) == 0.0
    with pytest.raises(ValueError):
        gaussian_upper_integral(0, 0, 1)


@pytest.mark.parametrize("mu,sigma,p", [(5, 2, 7), (5, 2, -3), (0.5, 0.1, 1.2), (40, 15, 10)])
def test_gaussian_against_quadrature(mu, sigma, p):
    ref, _ = integrate.quad(lambda t: math.exp(-(t - mu) ** 2 / (2 * sigma ** 2)), p, math.inf,
                            epsabs=0, epsrel=1e-13, limit=200)
    assert gaussian_upper_integral(mu, sigma, p) == pytest.approx(ref, rel=1e-9)


def test_gaussian_example_value():
    assert gaussian_upper_integral(5, 2, 7) == pytest.approx(math.sqrt(8 * math.pi) * 0.158655, rel=1e-5)


@settings(max_examples=100, deadline=None)
@given(st.floats(-100, 100), st.floats(0.01, 50), st.floats(-300, 300))
def test_gaussian_mass_conservation(mu, sigma, p):
    total = gaussian_upper_integral(mu, sigma, p) + gaussian_lower_integral(mu, sigma, p)
    assert total == pytest.approx(math.sqrt(2 * math.pi) * sigma, rel=1e-10)


def test_fixed_point_crossing_and_dominance():
    c = fixed_point_monotone(lambda x: x, lambda x: 1 - x, 0, 1)
    assert c.found and c.x == pytest.approx(0.5, abs=1e-10) and c.level == pytest.approx(0.5)
    d = fixed_point_monotone(lambda x: x + 5, lambda x: 1 - x, 0, 1)
    assert not d.found and d.status == "increasing_dominates" and d.x == 0
    e = fixed_point_monotone(lambda x: x, lambda x: 10 - x, 0, 1)
    assert e.status == "decreasing_dominates" and e.x == 1


def test_fixed_point_rejects_non_monotone():
    with pytest.raises(MonotonicityViolation):
        fixed_point_monotone(lambda x: math.sin(6 * x), lambda x: -x, 0, 2)
    with pytest.raises(ValueError):
        fixed_point_monotone(lambda x: x, lambda x: -x, 1, 1)
