import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from kickedrotor.entropy import (
    EntropyDomainError,
    Functional,
    entropy_series,
    gibbs,
    mean_series,
    renyi,
    tsallis,
    tsallis_many,
)
from kickedrotor.spectrum import SpectrumTrajectory
from oracles import random_spectrum


spectra = st.lists(st.floats(0.0, 1.0), min_size=1, max_size=16).filter(lambda v: sum(v) > 1e-3).map(
    lambda v: np.array(v) / sum(v)
)


def test_gibbs_trivial():
    assert gibbs([1.0, 0.0, 0.0]) == 0.0
    assert abs(gibbs([0.5, 0.5]) - math.log(2)) < 1e-12


def test_gibbs_matches_high_precision():
    p = [mpmath.mpf("0.7"), mpmath.mpf("0.2"), mpmath.mpf("0.1")]
    with mpmath.workdps(40):
        exact = -sum(x * mpmath.log(x) for x in p)
    assert abs(gibbs([0.7, 0.2, 0.1]) - float(exact)) < 1e-12


def test_gibbs_rejects_negative():
    with pytest.raises(EntropyDomainError):
        gibbs([1.1, -0.1])
    # round-off below the clamp tolerance is accepted
    assert gibbs([1.0, -1e-14]) == 0.0


def test_tsallis_trivial():
    assert abs(tsallis([0.5, 0.5], 2) - 0.5) < 1e-12
    for q in (0.2, 0.5, 2.0, 3.0):
        assert tsallis([1.0, 0.0, 0.0], q) == 0.0
    assert tsallis([0.3, 0.7], 1) == gibbs([0.3, 0.7])
    with pytest.raises(EntropyDomainError):
        tsallis([0.5, 0.5], 0.0)


def test_renyi_trivial():
    assert abs(renyi([0.5, 0.5], 2) - math.log(2)) < 1e-12
    assert renyi([1.0, 0.0], 3) == 0.0
    for n in (2, 5, 16):
        for order in (0.3, 2, 4.5):
            assert abs(renyi(np.full(n, 1 / n), order) - math.log(n)) < 1e-12
    with pytest.raises(EntropyDomainError):
        renyi([0.0, 0.0])


@pytest.mark.parametrize("n", [2, 7, 16])
def test_tsallis_continuity_at_one(rng, n):
    for _ in range(50):
        p = random_spectrum(rng, n)
        for q in (1 - 1e-6, 1 + 1e-6):
            assert abs(tsallis(p, q) - gibbs(p)) < 1e-4


def test_q_limit_linear_bound(rng):
    # |S_q - S_G| / |q - 1| stays bounded as q -> 1
    ratios = []
    for _ in range(1000):
        p = random_spectrum(rng, rng.integers(2, 17))
        for dq in (1e-2, 1e-3, 1e-4):
            ratios.append(abs(tsallis(p, 1 + dq) - gibbs(p)) / dq)
    assert max(ratios) < 0.5 * math.log(16) ** 2 + 1e-6


def test_monotone_in_index_over_random_spectra(rng):
    grid = np.linspace(0.1, 3.0, 30)
    for _ in range(1000):
        p = random_spectrum(rng, rng.integers(2, 17))
        s = np.array([tsallis(p, q) for q in grid])
        r = np.array([renyi(p, a) for a in grid if a != 1.0])
        assert np.all(np.diff(s) <= 1e-12)
        assert np.all(np.diff(r) <= 1e-12)


@settings(max_examples=200, deadline=None)
@given(p=spectra, q=st.floats(0.1, 3.0))
def test_bounds_and_permutation(p, q):
    n = int(np.count_nonzero(p))
    assert -1e-12 <= gibbs(p) <= math.log(n) + 1e-12
    bound = (1 - n ** (1 - q)) / (q - 1) if q != 1 else math.log(n)
    assert -1e-12 <= tsallis(p, q) <= bound + 1e-9
    assert -1e-12 <= renyi(p, q if q != 1 else 2) <= math.log(n) + 1e-9
    perm = p[::-1].copy()
    assert tsallis(perm, q) == pytest.approx(tsallis(p, q), abs=1e-12)
    assert gibbs(perm) == pytest.approx(gibbs(p), abs=1e-12)


@pytest.mark.parametrize("n", [1, 3, 10])
@pytest.mark.parametrize("q", [0.3, 0.8, 2.5])
def test_bounds_attained_at_uniform(n, q):
    p = np.full(n, 1 / n)
    assert abs(gibbs(p) - math.log(n)) < 1e-12
    assert abs(tsallis(p, q) - (1 - n ** (1 - q)) / (q - 1)) < 1e-12


def test_vectorized_matches_scalar(rng):
    S = np.array([random_spectrum(rng, 8) for _ in range(20)])
    S[3] = [1, 0, 0, 0, 0, 0, 0, 0]
    for q in (0.155, 0.5, 1.0, 2.0):
        ref = [tsallis(s, q) for s in S]
        np.testing.assert_allclose(tsallis_many(S, q), ref, rtol=1e-13, atol=1e-15)


def test_series_of_pure_states_is_zero():
    traj = SpectrumTrajectory(np.arange(1, 6), np.tile([1.0, 0, 0, 0], (5, 1)))
    for f in (Functional("gibbs"), Functional("tsallis", 0.3), Functional("renyi", 2)):
        s = entropy_series(traj, f)
        np.testing.assert_array_equal(s.values, 0.0)
        np.testing.assert_array_equal(s.kicks, traj.times)


def test_series_of_uniform_is_log_n():
    traj = SpectrumTrajectory(np.arange(1, 6), np.full((5, 10), 0.1))
    np.testing.assert_allclose(entropy_series(traj).values, math.log(10), atol=1e-12)


def test_series_continuity_near_q_one(rng):
    traj = SpectrumTrajectory(np.arange(1, 31), np.array([random_spectrum(rng, 10) for _ in range(30)]))
    g = entropy_series(traj, "gibbs").values
    t = entropy_series(traj, ("tsallis", 0.9999)).values
    assert np.max(np.abs(g - t)) < 1e-3


def test_mean_series_needs_common_grid():
    a = SpectrumTrajectory([1, 2], [[1.0, 0.0], [0.5, 0.5]])
    b = SpectrumTrajectory([1, 3], [[1.0, 0.0], [0.5, 0.5]])
    with pytest.raises(ValueError):
        mean_series([entropy_series(a), entropy_series(b)])
    mean, err = mean_series([entropy_series(a), entropy_series(a)])
    np.testing.assert_array_equal(err, 0.0)
