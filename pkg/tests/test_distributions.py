import itertools
import math
from collections import defaultdict

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from steincert.distributions import (
    DiscreteDistribution,
    cdf_pair,
    convolve,
    make_rng,
    normal_cdf,
    normal_sf,
    sample,
)
from steincert.errors import AtomCapExceeded, DistributionError


@st.composite
def small_laws(draw, max_atoms=5):
    k = draw(st.integers(1, max_atoms))
    atoms = draw(st.lists(st.integers(-20, 20), min_size=k, max_size=k, unique=True))
    weights = np.array(draw(st.lists(st.integers(1, 9), min_size=k, max_size=k)), dtype=float)
    return DiscreteDistribution.from_atoms(np.array(atoms) / 4.0, weights / weights.sum())


def brute_force_sum(d1, d2):
    table = defaultdict(float)
    for (a, p), (b, q) in itertools.product(zip(d1.atoms, d1.probs), zip(d2.atoms, d2.probs)):
        table[a + b] += p * q
    return table


@given(small_laws(), small_laws())
def test_convolution_matches_enumeration(d1, d2):
    got = convolve(d1, d2)
    oracle = brute_force_sum(d1, d2)
    assert sorted(oracle) == pytest.approx(got.atoms.tolist())
    assert [oracle[a] for a in sorted(oracle)] == pytest.approx(got.probs.tolist(), abs=1e-15)


@given(small_laws(), small_laws())
def test_convolution_adds_mean_and_variance(d1, d2):
    s = convolve(d1, d2)
    assert math.fsum(s.probs) == pytest.approx(1.0, abs=1e-14)
    assert s.mean() == pytest.approx(d1.mean() + d2.mean(), abs=1e-12)
    assert s.variance() == pytest.approx(d1.variance() + d2.variance(), abs=1e-12)


@given(small_laws())
def test_json_round_trip_is_exact(d):
    back = DiscreteDistribution.from_json(d.to_json())
    assert np.array_equal(back.atoms, d.atoms) and np.array_equal(back.probs, d.probs)


@pytest.mark.parametrize("atoms, probs, msg", [
    ([0, 1], [0.5], "atoms but"),
    ([0, 1], [1.5, -0.5], "negative probability"),
    ([0, 1], [0.5, 0.4], "sum to"),
    ([0, math.nan], [0.5, 0.5], "finite"),
    ([0, 1], [0.0, 0.0], "sum to"),
])
def test_invalid_laws_rejected(atoms, probs, msg):
    with pytest.raises(DistributionError, match=msg):
        DiscreteDistribution.from_atoms(atoms, probs)


def test_close_atoms_merge_and_zero_mass_dropped():
    d = DiscreteDistribution.from_atoms([0.0, 1e-13, 1.0, 2.0], [0.25, 0.25, 0.5, 0.0])
    assert len(d) == 2
    assert d.probs.tolist() == [0.5, 0.5]
    assert 0.0 <= d.atoms[0] <= 1e-13


def test_atoms_are_read_only():
    d = DiscreteDistribution.symmetric([1.0], [1.0])
    with pytest.raises(ValueError):
        d.atoms[0] = 3.0


def test_atom_cap():
    d = DiscreteDistribution.from_atoms(np.arange(100.0), np.full(100, 0.01))
    with pytest.raises(AtomCapExceeded, match="Monte Carlo"):
        convolve(d, d, cap=9999)


def test_cdf_pair_one_sided_limits():
    d = DiscreteDistribution.symmetric([1.0, 2.0], [0.5, 0.5])
    assert cdf_pair(d, -1.0) == pytest.approx((0.5, 0.25))
    assert cdf_pair(d, 0.0) == pytest.approx((0.5, 0.5))
    assert cdf_pair(d, 5.0) == (1.0, 1.0)


def test_normal_cdf_against_erfc():
    for x in (-30.0, -5.0, -1.0, 0.0, 0.7, 8.0):
        assert normal_cdf(x) == pytest.approx(0.5 * math.erfc(-x / math.sqrt(2)), rel=1e-14)
        assert normal_sf(x) == pytest.approx(0.5 * math.erfc(x / math.sqrt(2)), rel=1e-14)


def test_sampling_is_reproducible_and_unbiased():
    d = DiscreteDistribution.from_atoms([-1.0, 0.0, 3.0], [0.5, 0.25, 0.25])
    a, b = sample(d, 200_000, seed=7), sample(d, 200_000, seed=7)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, sample(d, 200_000, seed=8))
    assert a.mean() == pytest.approx(d.mean(), abs=0.02)
    assert set(np.unique(a)) == {-1.0, 0.0, 3.0}


def test_substreams_are_distinct():
    x = make_rng(1, 5, 0).random(4)
    y = make_rng(1, 5, 1).random(4)
    assert not np.array_equal(x, y)
    assert np.array_equal(x, make_rng(1, 5, 0).random(4))
