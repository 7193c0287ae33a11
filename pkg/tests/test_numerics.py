import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate as sp_integrate
from scipy import optimize

from steincert.errors import QuadratureError, RootBracketError
from steincert.numerics import compensated_sum, find_root, integrate, kahan_add, scan_bracket

finite = st.floats(-5, 5, allow_nan=False)


@given(st.lists(finite, min_size=1, max_size=12), finite, st.floats(0.01, 4))
def test_polynomials_integrated_exactly(coeffs, a, width):
    # oracle: exact antiderivative
    b = a + width
    poly = np.polynomial.Polynomial(coeffs)
    anti = poly.integ()
    got = integrate(poly, a, b, 1e-12).value
    assert got == pytest.approx(anti(b) - anti(a), rel=1e-11, abs=1e-11)


def test_tolerance_below_roundoff_stops_at_floor():
    # |integral| ~ 3.6e6, so an absolute 1e-12 is below double resolution
    poly = np.polynomial.Polynomial([0.0] * 10 + [-4.0, 1.05])
    anti = poly.integ()
    res = integrate(poly, 1.0, 5.0, 1e-12)
    assert res.value == pytest.approx(anti(5.0) - anti(1.0), rel=1e-14)
    assert res.error_estimate < 1e-14 * abs(res.value)


def test_gaussian_over_real_line():
    got = integrate(lambda x: np.exp(-0.5 * x * x), -math.inf, math.inf, 1e-13).value
    assert got == pytest.approx(math.sqrt(2 * math.pi), rel=1e-13)


@pytest.mark.parametrize("lo, hi, f", [
    (0.0, math.inf, lambda x: np.exp(-x)),
    (-math.inf, 0.0, lambda x: np.exp(x)),
    (2.0, math.inf, lambda x: 1 / x**2),
])
def test_half_infinite_intervals(lo, hi, f):
    oracle = sp_integrate.quad(f, lo, hi, epsabs=1e-13)[0]
    assert integrate(f, lo, hi, 1e-12).value == pytest.approx(oracle, abs=1e-11)


def test_reversed_limits_flip_sign():
    f = lambda x: np.sin(x) + 2  # noqa: E731
    assert integrate(f, 1.0, 0.0).value == pytest.approx(-integrate(f, 0.0, 1.0).value, abs=1e-14)


def test_breakpoints_handle_kinks():
    f = lambda x: np.abs(x - 0.3) + (x > 0.7)  # noqa: E731
    got = integrate(f, -1.0, 1.0, 1e-12, points=(0.3, 0.7)).value
    # |x - 0.3| over [-1, 1] is (1.3^2 + 0.7^2) / 2, the step adds 0.3
    assert got == pytest.approx((1.3**2 + 0.7**2) / 2 + 0.3, abs=1e-12)


def test_non_finite_integrand_raises():
    with pytest.raises(QuadratureError), np.errstate(divide="ignore"):
        integrate(lambda x: 1 / x, -1.0, 1.0)


def test_budget_exhaustion_reports_best_estimate():
    with pytest.raises(QuadratureError) as info:
        integrate(lambda x: np.abs(x) ** -0.9, 1e-300, 1.0, 1e-14, max_intervals=20)
    assert math.isfinite(info.value.best_estimate)
    assert info.value.best_estimate > 0


cubic_roots = st.floats(-3, 3).filter(lambda r: abs(r) > 1e-3)


@given(cubic_roots, st.floats(0.5, 3))
def test_brent_matches_scipy(root, scale):
    f = lambda x: scale * (x - root) * (x * x + 1)  # noqa: E731
    res = find_root(f, -4.0, 4.0, 1e-12)
    assert res.root == pytest.approx(optimize.brentq(f, -4.0, 4.0, xtol=1e-14), abs=1e-11)
    lo, hi = res.bracket
    assert lo <= res.root <= hi
    assert hi - lo <= 1e-11


def test_brent_exact_zero_at_endpoint():
    res = find_root(lambda x: x, 0.0, 1.0)
    assert res.root == 0.0 and res.bracket == (0.0, 0.0)


def test_brent_without_sign_change():
    with pytest.raises(RootBracketError) as info:
        find_root(lambda x: x * x + 1, -1.0, 1.0)
    assert info.value.f_lo == 2.0 and info.value.f_hi == 2.0


def test_scan_bracket_finds_first_cell_and_reports_table():
    assert scan_bracket(lambda x: math.cos(x), 0.1, 10.0, 0.1) == pytest.approx((1.5, 1.6))
    with pytest.raises(RootBracketError, match=r"\(0.10, "):
        scan_bracket(lambda x: 1.0 + x, 0.1, 1.0, 0.1)


@given(st.lists(st.floats(-1e12, 1e12, allow_nan=False), max_size=50))
def test_compensated_sum_is_correctly_rounded(values):
    exact = sum((Fraction(v) for v in values), Fraction(0))
    assert compensated_sum(values) == float(exact)


def test_kahan_accumulation_beats_naive():
    total, comp = np.zeros(1), np.zeros(1)
    for _ in range(100_000):
        kahan_add(total, comp, np.array([0.1]))
    assert abs(total[0] - 10_000.0) < 1e-9
