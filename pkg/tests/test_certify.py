import json
import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from steincert.certify import (
    CONSISTENT,
    INCONCLUSIVE,
    INCONSISTENT,
    CertifyConfig,
    certify_bounds,
    optimality_scan,
    verdict_for,
)
from steincert.constants import constants_pipeline
from steincert.errors import SpecError
from steincert.kolmogorov import DistanceResult
from steincert.triangular_array import ArraySpec, relaxed_closed_form

C_TILDE = constants_pipeline(1.7).c_tilde
C0 = 1 - 2 * (1 - math.exp(-0.5))
QUICK = CertifyConfig(n_grid=(8, 200), samples=20_000)


def test_example_certificate_bounds():
    cert = certify_bounds(ArraySpec.example(0.5), QUICK)
    assert cert.upper == 0.5
    assert cert.lower == pytest.approx(C_TILDE * relaxed_closed_form(0.5, 0.5), rel=1e-15)
    assert cert.lower <= cert.upper
    rounded = certify_bounds(ArraySpec.example(0.5), CertifyConfig(n_grid=(8,), rounded_constant=True))
    assert rounded.lower == pytest.approx(0.0019010, abs=2e-7)
    assert rounded.c_tilde_used == 0.033


def test_upper_bound_is_alpha():
    assert certify_bounds(ArraySpec.example(0.25), CertifyConfig(n_grid=(6,))).upper == 0.25


def test_certificate_json_shape_and_determinism():
    a = certify_bounds(ArraySpec.example(0.5), QUICK).to_dict()
    b = certify_bounds(ArraySpec.example(0.5), QUICK).to_dict()
    assert set(a) == {"spec", "lower", "upper", "empirical", "constants", "verdict", "config"}
    assert json.dumps(a) == json.dumps(b)
    assert a["config"]["seed"] == 0 and "generator" in a["config"]


def test_rejected_spec_propagates():
    with pytest.raises(SpecError):
        certify_bounds(ArraySpec.example(0.8), QUICK)


@pytest.mark.slow
def test_rademacher_certificate():
    cert = certify_bounds(ArraySpec.rademacher(), CertifyConfig(n_grid=(2000, 4000, 8000)))
    assert cert.lower == 0.0 and cert.upper == 0.0
    assert cert.verdict == CONSISTENT


def _curve(*values, hw=0.0):
    return [DistanceResult(v, "empirical", n=i, half_width=hw) for i, v in enumerate(values)]


@pytest.mark.parametrize("curve, verdict", [
    (_curve(0.05, 0.04, 0.03), CONSISTENT),
    (_curve(0.05, 0.04, 0.104), CONSISTENT),          # within half-width plus slack
    (_curve(0.2, 0.2, 0.2), INCONSISTENT),            # flat and far above the upper bound
    (_curve(0.4, 0.3, 0.2), INCONCLUSIVE),            # above, but still falling
    (_curve(0.0, 0.0, 0.0), INCONSISTENT),            # below the lower bound
    ([], INCONCLUSIVE),
])
def test_verdict_rule(curve, verdict):
    assert verdict_for(0.02, 0.1, curve, 0.005)[0] == verdict


def test_half_width_widens_the_band():
    assert verdict_for(0.02, 0.1, _curve(0.12, 0.12, hw=0.02), 0.005)[0] == CONSISTENT


@given(st.floats(0.01, 0.49), st.floats(0.001, 0.01))
def test_bounds_increase_with_alpha(alpha, step):
    lo = optimality_scan(0, [alpha + step, alpha], C_TILDE).rows
    assert lo[0]["lower"] > lo[1]["lower"] and lo[0]["upper"] > lo[1]["upper"]
    assert all(r["lower"] <= r["upper"] for r in lo)


def test_optimality_ratio_grows_per_decade():
    table = optimality_scan(1, [0.1, 0.01, 0.001], C_TILDE)
    assert all(g >= 8 for g in table.growth_per_decade())


def test_optimality_boundary_exponent_converges():
    table = optimality_scan(0, [0.1, 0.01, 0.001, 1e-5], C_TILDE)
    assert table.rows[-1]["ratio"] == pytest.approx(C_TILDE * C0, rel=1e-4)


def test_optimality_single_alpha_and_errors():
    assert len(optimality_scan(1, [0.3]).rows) == 1
    for p, grid in [(-1, [0.1]), (1, []), (1, [0.6]), (1, [0.01, 0.1])]:
        with pytest.raises(ValueError):
            optimality_scan(p, grid, C_TILDE)
