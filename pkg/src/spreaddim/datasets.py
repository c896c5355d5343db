"""Seeded synthetic point clouds and subset samplers.

Randomness comes from numpy's ``PCG64`` bit generator seeded through
``SeedSequence``, so a given (parameters, seed) pair gives the same array on
every platform.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .metric_space import PointCloud, SubsetIndex

RNG_ALGORITHM = "numpy.random.PCG64 via SeedSequence"

SWISS_ROLL_HEIGHT = 21.0

# child streams of a seed; the root stream (no key) draws the points themselves
NOISE_STREAM = 1
SUBSET_STREAM = 2


def make_rng(seed: int, *stream: int) -> np.random.Generator:
    """Generator for ``seed``; extra integers select an independent child stream."""
    if seed < 0:
        raise ValueError("seed must be nonnegative")
    ss = np.random.SeedSequence(seed, spawn_key=tuple(stream))
    return np.random.Generator(np.random.PCG64(ss))


@dataclass(frozen=True)
class GeneratorConfig:
    shape: str
    n_points: int
    seed: int
    dim: int = 3
    noise: float = 0.0

    def build(self) -> PointCloud:
        if self.shape == "swiss-roll":
            return swiss_roll(self.n_points, self.seed, noise=self.noise)
        if self.shape == "hypercube":
            return uniform_hypercube(self.n_points, self.dim, self.seed)
        raise ValueError(f"unknown shape {self.shape!r}")


def swiss_roll_params(n: int, seed: int) -> tuple[np.ndarray, np.ndarray]:
    """The (angle, height) pairs behind :func:`swiss_roll` for the same n and seed."""
    if n < 1:
        raise ValueError("n must be at least 1")
    rng = make_rng(seed)
    theta = 1.5 * np.pi * (1 + 2 * rng.random(n))
    height = SWISS_ROLL_HEIGHT * rng.random(n)
    return theta, height


def swiss_roll(n: int, seed: int, noise: float = 0.0) -> PointCloud:
    """Swiss roll in R^3: (theta cos theta, h, theta sin theta).

    theta is uniform on [1.5 pi, 4.5 pi] and h uniform on [0, 21], following the
    usual scikit-learn parametrisation. ``noise`` adds isotropic Gaussian noise
    with that standard deviation.
    """
    theta, height = swiss_roll_params(n, seed)
    pts = np.column_stack([theta * np.cos(theta), height, theta * np.sin(theta)])
    if noise:
        if noise < 0:
            raise ValueError("noise must be nonnegative")
        pts = pts + noise * make_rng(seed, NOISE_STREAM).standard_normal(pts.shape)
    return PointCloud(pts)


def uniform_hypercube(n: int, dim: int, seed: int) -> PointCloud:
    if n < 1 or dim < 1:
        raise ValueError("n and dim must be at least 1")
    return PointCloud(make_rng(seed).random((n, dim)))


def sample_subset(n: int, k: int, seed: int, *stream: int) -> SubsetIndex:
    """k distinct indices from range(n), uniformly without replacement, sorted."""
    if not 1 <= k <= n:
        raise ValueError(f"need 1 <= k <= n, got k={k}, n={n}")
    rng = make_rng(seed, *stream)
    return SubsetIndex(np.sort(rng.choice(n, size=k, replace=False)), n)
