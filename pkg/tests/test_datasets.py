import numpy as np
import pytest

from spreaddim.datasets import (
    GeneratorConfig,
    sample_subset,
    swiss_roll,
    swiss_roll_params,
    uniform_hypercube,
)
from spreaddim.spread import ScaleGrid, full_sweep


class TestSwissRoll:
    def test_shape(self):
        assert swiss_roll(10000, 0).points.shape == (10000, 3)

    def test_parametrisation_identity(self):
        pts = swiss_roll(2000, 7).points
        theta, height = swiss_roll_params(2000, 7)
        np.testing.assert_allclose(pts[:, 0] ** 2 + pts[:, 2] ** 2, theta**2, rtol=1e-12)
        np.testing.assert_array_equal(pts[:, 1], height)

    def test_ranges(self):
        pts = swiss_roll(5000, 3).points
        radius = np.hypot(pts[:, 0], pts[:, 2])
        assert radius.min() >= 1.5 * np.pi - 1e-12 and radius.max() <= 4.5 * np.pi + 1e-12
        assert pts[:, 1].min() >= 0 and pts[:, 1].max() <= 21

    def test_deterministic(self):
        assert np.array_equal(swiss_roll(500, 11).points, swiss_roll(500, 11).points)
        assert not np.array_equal(swiss_roll(500, 11).points, swiss_roll(500, 12).points)

    def test_noise(self):
        clean, noisy = swiss_roll(300, 2).points, swiss_roll(300, 2, noise=0.1).points
        assert 0 < np.abs(noisy - clean).std() < 0.2
        assert np.array_equal(noisy, swiss_roll(300, 2, noise=0.1).points)

    def test_zero_points(self):
        with pytest.raises(ValueError):
            swiss_roll(0, 1)


class TestHypercube:
    def test_bounds_and_shape(self):
        pts = uniform_hypercube(400, 5, 9).points
        assert pts.shape == (400, 5)
        assert pts.min() >= 0 and pts.max() <= 1

    def test_deterministic(self):
        assert np.array_equal(uniform_hypercube(50, 2, 4).points, uniform_hypercube(50, 2, 4).points)

    @pytest.mark.parametrize("n, dim", [(0, 2), (3, 0)])
    def test_bad_arguments(self, n, dim):
        with pytest.raises(ValueError):
            uniform_hypercube(n, dim, 0)

    def test_unit_interval_plateaus_near_one(self):
        cloud = uniform_hypercube(3000, 1, 5)
        prof = full_sweep(cloud, ScaleGrid.linspace(1, 400, 60))
        middle = prof.dimension_values[(prof.grid.values > 20) & (prof.grid.values < 150)]
        assert middle.size > 5
        assert np.all(np.abs(middle - 1) < 0.15)


class TestSubset:
    def test_full(self):
        np.testing.assert_array_equal(sample_subset(12, 12, 0).indices, np.arange(12))

    def test_single(self):
        s = sample_subset(12, 1, 3)
        assert s.k == 1 and 0 <= s.indices[0] < 12

    def test_hundred_of_ten_thousand(self):
        s = sample_subset(10000, 100, 1)
        assert s.k == 100 and np.all(np.diff(s.indices) > 0)

    def test_deterministic(self):
        assert np.array_equal(sample_subset(1000, 50, 8).indices, sample_subset(1000, 50, 8).indices)

    @pytest.mark.parametrize("k", [0, 13])
    def test_bad_size(self, k):
        with pytest.raises(ValueError):
            sample_subset(12, k, 0)

    def test_uniformity(self):
        counts = np.bincount([sample_subset(10, 1, seed).indices[0] for seed in range(10000)], minlength=10)
        assert np.all(np.abs(counts / 10000 - 0.1) < 0.02)


def test_generator_config():
    cfg = GeneratorConfig("hypercube", 20, 1, dim=4)
    assert cfg.build().points.shape == (20, 4)
    with pytest.raises(ValueError):
        GeneratorConfig("torus", 5, 0).build()
