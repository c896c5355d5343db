import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import oracle_psi_phi, random_metric, random_space
from spreaddim.metric_space import DistanceMatrix, PointCloud, SubsetIndex, euclidean_distances
from spreaddim.spread import (
    THREADS_ENV,
    ScaleGrid,
    exp_moments,
    full_sweep,
    phi,
    phi_sample,
    pseudo_spread,
    pseudo_spread_dimension,
    psi,
    psi_sample,
    spread,
    spread_dimension,
    sweep_profile,
)

E1 = math.exp(-1.0)
# closed forms for two points at distance 1, t = 1
TWO_POINT_PSI = 2 / (1 + E1)
TWO_POINT_PHI = 2 * E1 / (1 + E1) ** 2
TWO_POINT_DIM = E1 / (1 + E1)

TWO = DistanceMatrix([[0.0, 1.0], [1.0, 0.0]])

seeds = st.integers(0, 2**32 - 1)
scales = st.floats(0.0, 50.0, allow_nan=False)


def test_closed_form_constants():
    assert TWO_POINT_PSI == pytest.approx(1.462117, abs=1e-6)
    assert TWO_POINT_PHI == pytest.approx(0.393224, abs=1e-6)
    assert TWO_POINT_DIM == pytest.approx(0.268941, abs=1e-6)


class TestPsiPhi:
    def test_psi_at_zero(self, rng):
        assert psi(rng.random(17) * 5, 0.0) == 1.0

    def test_psi_two_point(self):
        assert psi([0.0, 1.0], 1.0) == pytest.approx(TWO_POINT_PSI, abs=1e-15)

    def test_psi_large_t(self):
        assert psi([0.0, 1.0], 700.0) == pytest.approx(2.0, abs=1e-12)

    def test_phi_at_zero_is_mean_distance(self, rng):
        row = np.concatenate([[0.0], rng.random(20) * 3])
        assert phi(row, 0.0) == pytest.approx(row.mean(), rel=1e-14)

    def test_phi_two_point(self):
        assert phi([0.0, 1.0], 1.0) == pytest.approx(TWO_POINT_PHI, abs=1e-15)

    def test_phi_zero_row(self):
        for t in (0.0, 0.3, 10.0):
            assert phi(np.zeros(5), t) == 0.0

    @pytest.mark.parametrize("seed", range(10))
    def test_against_pure_python_oracle(self, seed):
        r = np.random.default_rng(seed)
        row = np.concatenate([[0.0], r.random(int(r.integers(1, 300))) * r.uniform(0.1, 20)])
        for t in (0.0, 0.01, 0.7, 3.0, 40.0):
            want_psi, want_phi = oracle_psi_phi(row, t)
            assert psi(row, t) == pytest.approx(want_psi, rel=1e-12)
            assert phi(row, t) == pytest.approx(want_phi, rel=1e-12, abs=1e-300)

    @given(seeds, scales)
    @settings(max_examples=100, deadline=None)
    def test_psi_bounds(self, seed, t):
        r = np.random.default_rng(seed)
        row = np.concatenate([[0.0], r.exponential(2.0, size=int(r.integers(0, 50)))])
        p = psi(row, t)
        assert 1.0 <= p <= row.size
        assert phi(row, t) >= 0.0

    @given(seeds, scales, scales)
    @settings(max_examples=100, deadline=None)
    def test_psi_monotone_in_t(self, seed, t1, t2):
        r = np.random.default_rng(seed)
        row = np.concatenate([[0.0], r.exponential(2.0, size=int(r.integers(1, 50)))])
        lo, hi = sorted((t1, t2))
        assert psi(row, lo) <= psi(row, hi)


class TestSamples:
    def test_single_row_subset(self, rng):
        dm = random_metric(rng, 12)
        pdm = dm.rows(SubsetIndex([4], 12))
        assert psi_sample(pdm, 0.8).values[0] == psi(dm.values[4], 0.8)
        assert phi_sample(pdm, 0.8).values[0] == phi(dm.values[4], 0.8)

    def test_t_zero(self, rng):
        dm = random_metric(rng, 15)
        pdm = dm.rows(SubsetIndex([1, 3, 9], 15))
        np.testing.assert_array_equal(psi_sample(pdm, 0.0).values, 1.0)
        np.testing.assert_allclose(phi_sample(pdm, 0.0).values, dm.values[[1, 3, 9]].mean(axis=1),
                                   rtol=1e-14)

    def test_two_point(self):
        np.testing.assert_allclose(psi_sample(TWO.as_partial(), 1.0).values, [TWO_POINT_PSI] * 2,
                                   rtol=1e-15)
        np.testing.assert_allclose(phi_sample(TWO.as_partial(), 1.0).values, [TWO_POINT_PHI] * 2,
                                   rtol=1e-15)

    def test_single_point_space(self):
        one = DistanceMatrix([[0.0]])
        assert phi_sample(one.as_partial(), 2.0).values.tolist() == [0.0]


class TestSpread:
    def test_spread_zero_scale(self, rng):
        assert spread(random_metric(rng, 9), 0.0) == 1.0

    def test_spread_large_scale(self, rng):
        dm = random_metric(rng, 9)
        assert spread(dm, 1e4) == pytest.approx(9, abs=1e-9)

    def test_spread_two_point(self):
        assert spread(TWO, 1.0) == pytest.approx(TWO_POINT_PSI, abs=1e-12)

    def test_spread_equals_sum_of_reciprocals(self, rng):
        dm = random_metric(rng, 25)
        for t in (0.1, 1.0, 4.0):
            direct = sum(1 / math.fsum(math.exp(-t * d) for d in row) for row in dm.values)
            assert spread(dm, t) == pytest.approx(direct, rel=1e-13)

    def test_pseudo_spread_two_point_any_subset(self):
        for idx in ([0], [1], [0, 1]):
            pdm = TWO.rows(SubsetIndex(idx, 2))
            assert pseudo_spread(pdm, 1.0) == pytest.approx(TWO_POINT_PSI, abs=1e-15)

    def test_pseudo_spread_full_subset_is_spread(self, rng):
        dm = random_metric(rng, 30)
        for t in (0.0, 0.3, 2.0):
            assert pseudo_spread(dm.as_partial(), t) == spread(dm, t)

    def test_dimension_at_zero(self, rng):
        assert pseudo_spread_dimension(random_metric(rng, 8).as_partial(), 0.0) == 0.0

    def test_dimension_two_point(self):
        assert pseudo_spread_dimension(TWO.as_partial(), 1.0) == pytest.approx(TWO_POINT_DIM, abs=1e-12)
        assert spread_dimension(TWO, 1.0) == pytest.approx(TWO_POINT_DIM, abs=1e-12)

    def test_single_point_dimension(self):
        one = DistanceMatrix([[0.0]])
        for t in (0.0, 1.0, 100.0):
            assert spread_dimension(one, t) == 0.0

    def test_full_subset_matches_spread_dimension_50_points(self, rng):
        dm = euclidean_distances(PointCloud(rng.standard_normal((50, 3))))
        for t in rng.uniform(0, 20, size=10):
            assert pseudo_spread_dimension(dm.as_partial(), t) == spread_dimension(dm, t)


class TestProperties:
    @pytest.mark.parametrize("seed", range(10))
    def test_derivative_matches_central_difference(self, seed):
        r = np.random.default_rng(seed)
        dm = random_space(r, max_n=60)
        idx = np.sort(r.choice(dm.n, size=max(1, dm.n // 3), replace=False))
        pdm = dm.rows(SubsetIndex(idx, dm.n))
        h = 1e-5
        for t in r.uniform(0.1, 10, size=5):
            fd = (pseudo_spread(pdm, t + h) - pseudo_spread(pdm, t - h)) / (2 * h)
            mean_phi = float(np.mean(phi_sample(pdm, t).values))
            assert abs(fd - mean_phi) / abs(mean_phi) < 1e-6

    @pytest.mark.parametrize("seed", range(10))
    def test_growth_matches_log_log_difference(self, seed):
        r = np.random.default_rng(100 + seed)
        dm = random_space(r, max_n=60)
        pdm = dm.rows(SubsetIndex(np.arange(0, dm.n, 2), dm.n))
        h = 1e-5
        # scales tied to the distance scale; far beyond it the dimension decays
        # to ~1e-7 and the difference quotient is pure cancellation noise
        typical = np.median(dm.values[dm.values > 0])
        for t in r.uniform(0.2, 5, size=5) / typical:
            fd = (math.log(pseudo_spread(pdm, t * math.exp(h)))
                  - math.log(pseudo_spread(pdm, t * math.exp(-h)))) / (2 * h)
            dim = pseudo_spread_dimension(pdm, t)
            assert abs(fd - dim) / abs(dim) < 1e-5

    @given(seeds, st.floats(0.01, 20), st.floats(0.01, 100))
    @settings(max_examples=60, deadline=None)
    def test_scale_coupling(self, seed, t, c):
        dm = random_space(np.random.default_rng(seed), max_n=40)
        scaled = DistanceMatrix(dm.values * c)
        assert spread(scaled, t / c) == pytest.approx(spread(dm, t), rel=1e-12)

    @given(seeds, st.floats(0, 20))
    @settings(max_examples=40, deadline=None)
    def test_permutation_invariance(self, seed, t):
        r = np.random.default_rng(seed)
        dm = random_space(r, max_n=40)
        order = r.permutation(dm.n)
        perm = DistanceMatrix(dm.values[np.ix_(order, order)])
        assert spread(perm, t) == pytest.approx(spread(dm, t), rel=1e-13)
        assert spread_dimension(perm, t) == pytest.approx(spread_dimension(dm, t), rel=1e-12, abs=1e-300)

    @given(seeds, st.lists(scales, min_size=2, max_size=10, unique=True))
    @settings(max_examples=40, deadline=None)
    def test_spread_nondecreasing(self, seed, ts):
        dm = random_space(np.random.default_rng(seed), max_n=40)
        values = [spread(dm, t) for t in sorted(ts)]
        assert all(a <= b for a, b in zip(values, values[1:]))


class TestSweep:
    def test_grid_validation(self):
        with pytest.raises(ValueError):
            ScaleGrid([0.0, 0.0])
        with pytest.raises(ValueError):
            ScaleGrid([1.0, 0.5])
        with pytest.raises(ValueError):
            ScaleGrid([-1.0])
        with pytest.raises(ValueError):
            ScaleGrid([0.0, np.inf])

    def test_zero_grid(self, rng):
        prof = sweep_profile(random_metric(rng, 10).as_partial(), ScaleGrid([0.0]))
        assert prof.spread_values.tolist() == [1.0]
        assert prof.dimension_values.tolist() == [0.0]

    def test_two_point_grid(self):
        prof = sweep_profile(TWO.as_partial(), ScaleGrid([1.0]))
        assert prof.spread_values[0] == pytest.approx(TWO_POINT_PSI, abs=1e-12)
        assert prof.dimension_values[0] == pytest.approx(TWO_POINT_DIM, abs=1e-12)

    def test_sweep_bitwise_equals_single_calls(self, rng):
        cloud = PointCloud(rng.standard_normal((300, 3)))
        dm = euclidean_distances(cloud)
        pdm = dm.rows(SubsetIndex(np.sort(rng.choice(300, 37, replace=False)), 300))
        grid = ScaleGrid.linspace(0, 15, 200)
        prof = sweep_profile(pdm, grid)
        for i, t in enumerate(grid.values):
            assert prof.spread_values[i] == pseudo_spread(pdm, t)
            assert prof.dimension_values[i] == pseudo_spread_dimension(pdm, t)

    def test_profile_invariants(self, rng):
        dm = random_metric(rng, 40)
        prof = sweep_profile(dm.as_partial(), ScaleGrid.linspace(0, 30, 100))
        assert np.all(np.diff(prof.spread_values) >= 0)
        assert np.all((prof.spread_values >= 1) & (prof.spread_values <= 40))
        assert np.all(prof.dimension_values >= 0)

    def test_cloud_blocked_sweep_matches_matrix(self, rng):
        cloud = PointCloud(rng.standard_normal((700, 2)))
        grid = ScaleGrid.linspace(0, 10, 7)
        blocked = full_sweep(cloud, grid)
        dense = sweep_profile(euclidean_distances(cloud).as_partial(), grid)
        assert np.array_equal(blocked.dimension_values, dense.dimension_values)
        assert np.array_equal(blocked.spread_values, dense.spread_values)


class TestKernel:
    def test_row_results_independent_of_batch(self, rng):
        d = rng.random((41, 333)) * 9
        ts = [0.0, 0.5, 3.0]
        s0, s1 = exp_moments(d, ts)
        for i in (0, 7, 8, 40):
            r0, r1 = exp_moments(d[i:i + 1], ts)
            assert np.array_equal(r0[:, 0], s0[:, i])
            assert np.array_equal(r1[:, 0], s1[:, i])

    @pytest.mark.parametrize("threads", ["1", "2", "3", "8"])
    def test_thread_count_does_not_change_results(self, rng, monkeypatch, threads):
        d = rng.random((150, 400)) * 5
        monkeypatch.setenv(THREADS_ENV, "1")
        ref = exp_moments(d, [0.2, 2.0])
        monkeypatch.setenv(THREADS_ENV, threads)
        got = exp_moments(d, [0.2, 2.0])
        assert np.array_equal(ref[0], got[0]) and np.array_equal(ref[1], got[1])

    def test_bad_thread_env(self, monkeypatch):
        monkeypatch.setenv(THREADS_ENV, "0")
        with pytest.raises(ValueError):
            exp_moments(np.zeros((1, 1)), [1.0])

    def test_negative_scale_rejected(self):
        with pytest.raises(ValueError):
            psi([0.0, 1.0], -1.0)
