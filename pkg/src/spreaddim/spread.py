"""Spread, pseudo spread and their instantaneous growth (spread dimension).

For a point x of a finite space X and scale t,

    psi_x(t) = |X| / sum_y exp(-t d(x, y))
    phi_x(t) = d/dt psi_x(t) = |X| sum_z d(x, z) exp(-t d(x, z)) / (sum_y exp(-t d(x, y)))**2

The pseudo spread over a subset S is the mean of psi over S, its derivative is
the mean of phi over S, and the pseudo spread dimension is
``t * mean(phi) / mean(psi)``. With S = X these are the spread and the spread
dimension.

All evaluation funnels through one blocked kernel, so a value computed for a
row does not depend on which other rows or scales were evaluated alongside it.
That makes sweeps bitwise identical to single-scale calls and S = X results
bitwise identical to the full-matrix ones.
"""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .metric_space import (
    DistanceMatrix,
    MetricSpace,
    PartialDistanceMatrix,
    PointCloud,
    SubsetIndex,
    partial_distances,
)

THREADS_ENV = "SPREADDIM_THREADS"

# rows per exp/sum pass; small enough that the temporaries stay in cache
_ROW_BLOCK = 8
# rows of distances materialised at a time when sweeping a point cloud without the n x n matrix
_CLOUD_BLOCK = 256


def num_threads() -> int:
    raw = os.environ.get(THREADS_ENV, "1")
    try:
        value = int(raw)
    except ValueError:
        raise ValueError(f"{THREADS_ENV} must be a positive integer, got {raw!r}") from None
    if value < 1:
        raise ValueError(f"{THREADS_ENV} must be a positive integer, got {raw!r}")
    return value


@dataclass(frozen=True, eq=False)
class ScaleGrid:
    """Strictly increasing, finite, nonnegative scale values."""

    values: np.ndarray

    def __post_init__(self):
        vals = np.array(self.values, dtype=np.float64, ndmin=1)
        if vals.ndim != 1 or vals.size == 0:
            raise ValueError("scale grid must be a nonempty 1-d sequence")
        if not np.all(np.isfinite(vals)) or np.any(vals < 0):
            raise ValueError("scales must be finite and nonnegative")
        if np.any(np.diff(vals) <= 0):
            raise ValueError("scales must be strictly increasing")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @classmethod
    def linspace(cls, t_min: float, t_max: float, steps: int) -> "ScaleGrid":
        if steps < 1:
            raise ValueError("steps must be positive")
        if t_max < t_min or (steps > 1 and t_max == t_min):
            raise ValueError("t_max must exceed t_min")
        return cls(np.linspace(t_min, t_max, steps))

    def positive(self) -> "ScaleGrid":
        """The grid with t = 0 dropped."""
        return ScaleGrid(self.values[self.values > 0])

    def __len__(self) -> int:
        return self.values.size

    @property
    def span(self) -> float:
        return float(self.values[-1] - self.values[0])


@dataclass(frozen=True, eq=False)
class PsiSample:
    values: np.ndarray
    t: float
    n: int

    @property
    def k(self) -> int:
        return self.values.size


@dataclass(frozen=True, eq=False)
class PhiSample:
    values: np.ndarray
    t: float
    n: int

    @property
    def k(self) -> int:
        return self.values.size


@dataclass(frozen=True, eq=False)
class SpreadProfile:
    grid: ScaleGrid
    spread_values: np.ndarray
    dimension_values: np.ndarray


def _as_scales(t) -> np.ndarray:
    ts = np.array(t, dtype=np.float64, ndmin=1)
    if ts.ndim != 1:
        raise ValueError("scales must be a scalar or a 1-d sequence")
    if not np.all(np.isfinite(ts)) or np.any(ts < 0):
        raise ValueError("scales must be finite and nonnegative")
    return ts


def _moments_block(dist: np.ndarray, ts: np.ndarray, s0: np.ndarray, s1: np.ndarray) -> None:
    """Fill s0[j, i] = sum_x exp(-ts[j] d_ix) and s1[j, i] = sum_x d_ix exp(-ts[j] d_ix)."""
    n = dist.shape[1]
    e_buf = np.empty((_ROW_BLOCK, n))
    w_buf = np.empty((_ROW_BLOCK, n))
    for start in range(0, dist.shape[0], _ROW_BLOCK):
        stop = min(start + _ROW_BLOCK, dist.shape[0])
        d = dist[start:stop]
        e = e_buf[: stop - start]
        w = w_buf[: stop - start]
        for j, t in enumerate(ts):
            np.multiply(d, -t, out=e)
            np.exp(e, out=e)
            np.sum(e, axis=1, out=s0[j, start:stop])
            np.multiply(d, e, out=w)
            np.sum(w, axis=1, out=s1[j, start:stop])


def exp_moments(dist: np.ndarray, ts) -> tuple[np.ndarray, np.ndarray]:
    """Row sums of exp(-t d) and d exp(-t d) for every scale, shape (len(ts), rows).

    Rows are split across ``SPREADDIM_THREADS`` workers; each row is reduced by
    exactly the same operations whatever the split, so results do not depend on
    the thread count.
    """
    dist = np.asarray(dist, dtype=np.float64)
    if dist.ndim != 2:
        raise ValueError("distances must be a 2-d array")
    ts = _as_scales(ts)
    rows = dist.shape[0]
    s0 = np.empty((ts.size, rows))
    s1 = np.empty((ts.size, rows))
    workers = min(num_threads(), max(1, rows // _ROW_BLOCK))
    if workers == 1:
        _moments_block(dist, ts, s0, s1)
        return s0, s1
    # chunk boundaries on multiples of the row block keep per-row arithmetic identical
    n_blocks = -(-rows // _ROW_BLOCK)
    edges = [min(rows, (n_blocks * w // workers) * _ROW_BLOCK) for w in range(workers + 1)]

    def run(lo, hi):
        _moments_block(dist[lo:hi], ts, s0[:, lo:hi], s1[:, lo:hi])

    with ThreadPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(run, lo, hi) for lo, hi in zip(edges[:-1], edges[1:]) if hi > lo]
        for f in futures:
            f.result()
    return s0, s1


def psi_phi(dist: np.ndarray, ts, n: int | None = None) -> tuple[np.ndarray, np.ndarray]:
    """psi and phi for every (scale, row) pair, each of shape (len(ts), rows)."""
    dist = np.asarray(dist, dtype=np.float64)
    n = dist.shape[1] if n is None else n
    s0, s1 = exp_moments(dist, ts)
    psi_vals = n / s0
    phi_vals = n * s1 / (s0 * s0)
    return psi_vals, phi_vals


def _mean(values: np.ndarray) -> np.ndarray:
    return np.mean(values, axis=-1)


def growth_from_samples(ts, psi_vals: np.ndarray, phi_vals: np.ndarray) -> np.ndarray:
    """t * mean(phi) / mean(psi) per scale, from (len(ts), k) sample arrays."""
    return np.asarray(ts, dtype=np.float64) * _mean(phi_vals) / _mean(psi_vals)


def _check_row(row) -> np.ndarray:
    row = np.asarray(row, dtype=np.float64)
    if row.ndim != 1 or row.size == 0:
        raise ValueError("row must be a nonempty 1-d sequence of distances")
    return row


def psi(row, t: float) -> float:
    """|X| / sum_y exp(-t d(x, y)) for one row of distances from x."""
    p, _ = psi_phi(_check_row(row)[None, :], t)
    return float(p[0, 0])


def phi(row, t: float) -> float:
    """The t-derivative of :func:`psi` for one row of distances."""
    _, f = psi_phi(_check_row(row)[None, :], t)
    return float(f[0, 0])


def psi_sample(pdm: PartialDistanceMatrix, t: float) -> PsiSample:
    p, _ = psi_phi(pdm.values, t)
    return PsiSample(p[0], float(t), pdm.n)


def phi_sample(pdm: PartialDistanceMatrix, t: float) -> PhiSample:
    _, f = psi_phi(pdm.values, t)
    return PhiSample(f[0], float(t), pdm.n)


def pseudo_spread(pdm: PartialDistanceMatrix, t: float) -> float:
    p, _ = psi_phi(pdm.values, t)
    return float(_mean(p)[0])


def spread(dm: DistanceMatrix, t: float) -> float:
    return pseudo_spread(dm.as_partial(), t)


def pseudo_spread_dimension(pdm: PartialDistanceMatrix, t: float) -> float:
    ts = _as_scales(t)
    p, f = psi_phi(pdm.values, ts)
    return float(growth_from_samples(ts, p, f)[0])


def spread_dimension(dm: DistanceMatrix, t: float) -> float:
    return pseudo_spread_dimension(dm.as_partial(), t)


def sweep_profile(pdm: PartialDistanceMatrix, grid: ScaleGrid) -> SpreadProfile:
    """Pseudo spread and pseudo spread dimension at every scale of ``grid``."""
    p, f = psi_phi(pdm.values, grid.values)
    return SpreadProfile(grid, _mean(p), growth_from_samples(grid.values, p, f))


def cloud_psi_phi(cloud: PointCloud, subset: SubsetIndex, ts) -> tuple[np.ndarray, np.ndarray]:
    """psi and phi for the rows of ``subset``, building distances a block at a time.

    Identical to ``psi_phi(partial_distances(cloud, subset).values, ts)`` but peak
    memory is O(block * n + len(ts) * k) rather than O(k * n).
    """
    ts = _as_scales(ts)
    k = subset.k
    psi_vals = np.empty((ts.size, k))
    phi_vals = np.empty((ts.size, k))
    for start in range(0, k, _CLOUD_BLOCK):
        stop = min(start + _CLOUD_BLOCK, k)
        block = SubsetIndex(subset.indices[start:stop], subset.n)
        dist = partial_distances(cloud, block).values
        psi_vals[:, start:stop], phi_vals[:, start:stop] = psi_phi(dist, ts)
    return psi_vals, phi_vals


def space_psi_phi(space: MetricSpace, subset: SubsetIndex, ts) -> tuple[np.ndarray, np.ndarray]:
    if isinstance(space, PointCloud):
        return cloud_psi_phi(space, subset, ts)
    return psi_phi(space.rows(subset).values, ts)


def full_sweep(space: MetricSpace, grid: ScaleGrid) -> SpreadProfile:
    """Exact spread and spread dimension over ``grid`` (O(n^2) time).

    A point cloud is processed in row blocks, so the n x n matrix is never held.
    """
    n = space.n_points if isinstance(space, PointCloud) else space.n
    p, f = space_psi_phi(space, SubsetIndex.full(n), grid.values)
    return SpreadProfile(grid, _mean(p), growth_from_samples(grid.values, p, f))
