import math

import mpmath
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate as sp_integrate

from steincert.errors import ConsistencyError
from steincert.stein import (
    SQRT_2PI,
    TestFunction,
    bound_suite,
    classical_bound,
    derivative_stack,
    expected_value,
    expectation,
    indicator_solution,
    normal_abs_third_moment,
    solution_on_grid,
    solve,
    stein_eval,
    stein_residual,
    taylor_check,
)
from steincert.triangular_array import ArraySpec, build_row, feller_max, lindeberg_tail
from steincert.distributions import DiscreteDistribution, normal_pdf

locations = st.floats(-2.5, 2.5)
widths = st.floats(0.2, 3.0)


def indicator_oracle(z, x):
    """f(x) = e^{x^2/2} int_{-inf}^x (1{t <= z} - Phi(z)) e^{-t^2/2} dt in high precision."""
    z, x = mpmath.mpf(z), mpmath.mpf(x)
    phi_z = mpmath.ncdf(z)
    inner = mpmath.quad(lambda t: ((1 if t <= z else 0) - phi_z) * mpmath.exp(-t * t / 2),
                        [-mpmath.inf, min(x, z), x] if x > z else [-mpmath.inf, x])
    return float(mpmath.exp(x * x / 2) * inner)


@pytest.mark.parametrize("z, x", [(0.0, -3.0), (0.0, 0.0), (0.5, 1.7), (-1.0, 2.5), (1.0, -0.4)])
def test_indicator_solution_against_mpmath(z, x):
    assert indicator_solution(z, x)[0] == pytest.approx(indicator_oracle(z, x), rel=1e-12, abs=1e-15)


def test_indicator_solution_at_origin():
    # sqrt(2 pi) Phi(0) (1 - Phi(0))
    assert indicator_solution(0.0, 0.0)[0] == pytest.approx(SQRT_2PI / 4, rel=1e-15)
    assert solve(TestFunction.indicator(0.0)).f(0.0) == pytest.approx(SQRT_2PI / 4, rel=1e-12)


def test_indicator_closed_form_matches_quadrature_solution():
    sol = solve(TestFunction.indicator(0.3))
    xs = np.linspace(-4, 4, 41)
    quad = np.array([sol.f(x) for x in xs])
    assert np.max(np.abs(quad - indicator_solution(0.3, xs)[0])) < 1e-10


@given(locations, widths)
def test_smoothstep_expectation_closed_form(z, delta):
    h = TestFunction.smoothstep(z, delta)
    oracle = sp_integrate.quad(lambda t: float(h.h(t)) * float(normal_pdf(t)), -np.inf, np.inf, epsabs=1e-13)[0]
    assert h.expected_closed_form == pytest.approx(oracle, abs=1e-11)
    assert expected_value(h) == h.expected_closed_form


@given(locations, widths)
def test_smoothstep_norms_match_dense_grid(z, delta):
    h = TestFunction.smoothstep(z, delta)
    xs = np.linspace(z - 6 * delta, z + 6 * delta, 200_001)
    for key, g in (("h1", h.h1), ("h2", h.h2), ("h3", h.h3)):
        assert np.max(np.abs(g(xs))) == pytest.approx(h.norms[key], rel=1e-8)


@given(locations, widths, st.floats(-6, 6))
def test_stein_equation_holds(z, delta, x):
    h = TestFunction.smoothstep(z, delta)
    assert stein_residual(h, [x]) < 1e-9


@given(locations, widths)
def test_bounds_on_smoothstep_solutions(z, delta):
    rep = bound_suite(TestFunction.smoothstep(z, delta), np.linspace(-8, 8, 161))
    assert rep.sup_f2 <= rep.bound_f2 + 1e-9
    assert rep.osc_f1 <= 1 + 1e-9
    assert rep.passed and rep.to_dict()["pass"]


@pytest.mark.parametrize("z", [-2.0, -0.5, 0.0, 1.0, 2.5])
def test_indicator_oscillation(z):
    rep = bound_suite(TestFunction.indicator(z))
    assert rep.bound_f2 is None
    assert rep.osc_f1 <= 1 + 1e-9


def test_constant_function_has_zero_solution():
    f, f1, f2 = stein_eval(TestFunction.constant(3.0), 0.7)
    assert (f, f1, f2) == pytest.approx((0.0, 0.0, 0.0), abs=1e-14)


def test_solution_is_bounded_far_out():
    # f_h(x) ~ -(h(x) - E h) / x for large |x|
    h = TestFunction.smoothstep(0.0, 1.0)
    sol = solve(h)
    for x in (-40.0, 40.0):
        expected = -(float(h.h(x)) - sol.expected_h) / x
        assert sol.f(x) == pytest.approx(expected, rel=1e-2)


def test_solution_on_grid_marks_indicator_jump():
    table = solution_on_grid(TestFunction.indicator(0.0), [-1.0, 0.0, 1.0])
    assert math.isnan(table[1, 3])
    assert np.all(np.isfinite(table[[0, 2]]))


def test_expectation_under_discrete_law():
    d = DiscreteDistribution.symmetric([1.0], [1.0])
    assert expectation(TestFunction.indicator(0.0), d) == pytest.approx(0.5)


@given(locations, widths, st.floats(-3, 3), st.floats(-2, 2))
def test_taylor_remainders_within_bounds(z, delta, a, x):
    h = TestFunction.smoothstep(z, delta)
    # h'' changes sign, so the quadratic remainder is bounded by |h''| x^2, not half of it
    norms = {"d2": h.norms["h2"], "d3": h.norms["h3"]}
    assert taylor_check(derivative_stack(h), a, x, norms=norms).holds
    assert taylor_check(derivative_stack(h), a, x, norms={"osc1": 2 * h.norms["h1"], "d2": h.norms["h2"]},
                        order=1).holds


def test_taylor_violation_raises():
    h = TestFunction.smoothstep(0.0, 1.0)
    with pytest.raises(ConsistencyError):
        taylor_check(derivative_stack(h), 0.0, 1.0, norms={"d2": 1e-6, "d3": 1e-6})
    res = taylor_check(derivative_stack(h), 0.0, 0.0, norms={})
    assert res.remainder == 0.0 and res.bound == 0.0
    with pytest.raises(ValueError):
        taylor_check(derivative_stack(h), 0.0, 1.0, norms={}, order=3)


def test_normal_abs_third_moment():
    assert normal_abs_third_moment() == pytest.approx(2 * math.sqrt(2 / math.pi), rel=1e-13)


def test_classical_bound_formula():
    h = TestFunction.smoothstep(0.0, 1.0)
    spec = ArraySpec.example(0.5)
    row = build_row(spec, 200)
    expected = (h.norms["h3"] * (2 * math.sqrt(2 / math.pi) * math.sqrt(feller_max(row)) + 0.1) / 6
                + h.norms["h2"] * lindeberg_tail(row, 0.1))
    assert classical_bound(h, spec, 200, 0.1) == pytest.approx(expected, rel=1e-12)
    with pytest.raises(ValueError):
        classical_bound(TestFunction.indicator(0.0), spec, 200, 0.1)
