"""Finite metric spaces: point clouds, distance matrices and partial distance matrices.

Everything is float64. Arrays held by the types below are marked read-only, so
instances can be shared freely between threads.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path
from typing import Union

import numpy as np

# rows of the partial distance matrix produced per chunk; bounds the temporaries
_DIST_CHUNK = 64

ASYMMETRY_RTOL = 1e-9
DIAGONAL_ATOL = 1e-12


class ParseError(ValueError):
    """Malformed numeric text input."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class EmptyInputError(ParseError):
    pass


class MetricViolationError(ValueError):
    pass


def _frozen(values) -> np.ndarray:
    if isinstance(values, np.ndarray) and values.dtype == np.float64 and not values.flags.writeable:
        return values
    arr = np.array(values, dtype=np.float64, copy=True)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class PointCloud:
    """``n_points`` points in R^``ambient_dim`` under the Euclidean metric."""

    points: np.ndarray

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=np.float64)
        if pts.ndim == 1:
            pts = pts[:, None]
        if pts.ndim != 2:
            raise ValueError(f"points must be 2-dimensional, got shape {pts.shape}")
        if pts.shape[0] < 1 or pts.shape[1] < 1:
            raise ValueError("a point cloud needs at least one point and one coordinate")
        if not np.all(np.isfinite(pts)):
            raise ValueError("point coordinates must be finite")
        object.__setattr__(self, "points", _frozen(pts))

    @property
    def n_points(self) -> int:
        return self.points.shape[0]

    @property
    def ambient_dim(self) -> int:
        return self.points.shape[1]

    def __len__(self) -> int:
        return self.n_points

    def permuted(self, order) -> "PointCloud":
        return PointCloud(self.points[np.asarray(order)])


@dataclass(frozen=True, eq=False)
class SubsetIndex:
    """Sorted, duplicate-free, nonempty indices into a space of size ``n``."""

    indices: np.ndarray
    n: int

    def __post_init__(self):
        idx = np.asarray(self.indices)
        if idx.ndim != 1 or idx.size == 0:
            raise ValueError("subset must be a nonempty 1-d index sequence")
        if not np.issubdtype(idx.dtype, np.integer):
            if not np.all(np.equal(np.mod(idx, 1), 0)):
                raise ValueError("subset indices must be integers")
        idx = idx.astype(np.int64)
        if self.n < 1:
            raise ValueError("ambient size n must be positive")
        if idx.min() < 0 or idx.max() >= self.n:
            raise IndexError(f"subset index out of range [0, {self.n})")
        if np.any(np.diff(idx) <= 0):
            raise ValueError("subset indices must be strictly increasing")
        idx = idx.copy()
        idx.setflags(write=False)
        object.__setattr__(self, "indices", idx)

    @classmethod
    def full(cls, n: int) -> "SubsetIndex":
        return cls(np.arange(n), n)

    @property
    def k(self) -> int:
        return self.indices.size

    def __len__(self) -> int:
        return self.k


@dataclass(frozen=True, eq=False)
class DistanceMatrix:
    """Validated n x n metric: zero diagonal, exact symmetry, nonnegative, finite."""

    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=np.float64)
        if vals.ndim != 2 or vals.shape[0] != vals.shape[1] or vals.shape[0] < 1:
            raise ValueError(f"distance matrix must be square and nonempty, got shape {vals.shape}")
        if not np.all(np.isfinite(vals)):
            raise MetricViolationError("distance matrix has non-finite entries")
        if np.any(vals < 0):
            raise MetricViolationError("distance matrix has negative entries")
        if np.any(np.diag(vals) != 0):
            raise MetricViolationError("distance matrix has a nonzero diagonal")
        if not np.array_equal(vals, vals.T):
            raise MetricViolationError("distance matrix is not symmetric")
        object.__setattr__(self, "values", _frozen(vals))

    @property
    def n(self) -> int:
        return self.values.shape[0]

    def as_partial(self) -> "PartialDistanceMatrix":
        """The whole matrix viewed as the S = X partial distance matrix (no copy)."""
        return PartialDistanceMatrix(self.values, SubsetIndex.full(self.n))

    def rows(self, subset: SubsetIndex) -> "PartialDistanceMatrix":
        if subset.n != self.n:
            raise ValueError(f"subset was drawn from a space of size {subset.n}, not {self.n}")
        return PartialDistanceMatrix(self.values[subset.indices], subset)


@dataclass(frozen=True, eq=False)
class PartialDistanceMatrix:
    """The k x n block of distances d(s, x) for s in a subset S and x in X."""

    values: np.ndarray
    subset: SubsetIndex

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=np.float64)
        if vals.ndim != 2 or vals.shape != (self.subset.k, self.subset.n):
            raise ValueError(
                f"expected shape {(self.subset.k, self.subset.n)}, got {vals.shape}"
            )
        if not np.all(np.isfinite(vals)) or np.any(vals < 0):
            raise MetricViolationError("distances must be finite and nonnegative")
        if np.any(vals[np.arange(self.subset.k), self.subset.indices] != 0):
            raise MetricViolationError("self-distance of a subset element is nonzero")
        if vals.flags.writeable:
            vals = vals.copy()
            vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @property
    def n(self) -> int:
        return self.subset.n

    @property
    def k(self) -> int:
        return self.subset.k


MetricSpace = Union[PointCloud, DistanceMatrix]


def space_size(space: MetricSpace) -> int:
    return space.n_points if isinstance(space, PointCloud) else space.n


def _distance_block(points: np.ndarray, rows: np.ndarray) -> np.ndarray:
    # coordinate-wise (a - b)**2 keeps d(i, j) == d(j, i) bit for bit and d(i, i) == 0
    block = np.zeros((rows.size, points.shape[0]))
    diff = np.empty_like(block)
    for c in range(points.shape[1]):
        np.subtract(points[rows, c][:, None], points[None, :, c], out=diff)
        np.multiply(diff, diff, out=diff)
        block += diff
    return np.sqrt(block, out=block)


def partial_distances(cloud: PointCloud, subset: SubsetIndex) -> PartialDistanceMatrix:
    """Euclidean distances from each subset point to every point of ``cloud``.

    Memory is O(k n); no n x n array is ever allocated for k < n.
    """
    if subset.n != cloud.n_points:
        raise IndexError(
            f"subset indexes a space of size {subset.n}, cloud has {cloud.n_points} points"
        )
    out = np.empty((subset.k, cloud.n_points))
    idx = subset.indices
    for start in range(0, subset.k, _DIST_CHUNK):
        stop = min(start + _DIST_CHUNK, subset.k)
        out[start:stop] = _distance_block(cloud.points, idx[start:stop])
    out.setflags(write=False)
    return PartialDistanceMatrix(out, subset)


def euclidean_distances(cloud: PointCloud) -> DistanceMatrix:
    return DistanceMatrix(partial_distances(cloud, SubsetIndex.full(cloud.n_points)).values)


def partial_matrix(space: MetricSpace, subset: SubsetIndex) -> PartialDistanceMatrix:
    if isinstance(space, PointCloud):
        return partial_distances(space, subset)
    return space.rows(subset)


def check_triangle_inequality(dm: DistanceMatrix, n_triples: int = 1000, slack: float = 1e-9,
                              seed: int = 0) -> bool:
    """Spot check d(i, k) <= d(i, j) + d(j, k) on randomly sampled triples."""
    rng = np.random.default_rng(seed)
    i, j, k = rng.integers(0, dm.n, size=(3, n_triples))
    d = dm.values
    return bool(np.all(d[i, k] <= d[i, j] + d[j, k] + slack))


# ---------------------------------------------------------------------------
# text I/O

_SPLIT = re.compile(r"[,\s]+")


def _split_row(line: str) -> list[str]:
    return [cell for cell in _SPLIT.split(line.strip()) if cell]


def read_table(source) -> np.ndarray:
    """Read comma- or whitespace-delimited numbers, one row per line.

    A non-numeric first row is treated as a header and skipped. Blank lines and
    lines starting with ``#`` are ignored.
    """
    path = Path(source)
    rows: list[list[float]] = []
    width = None
    first_content = True
    with path.open() as fh:
        for lineno, line in enumerate(fh, start=1):
            stripped = line.strip()
            if not stripped or stripped.startswith("#"):
                continue
            cells = _split_row(stripped)
            try:
                values = [float(c) for c in cells]
            except ValueError:
                if first_content:
                    first_content = False
                    continue
                raise ParseError(f"non-numeric cell in row {stripped!r}", lineno) from None
            first_content = False
            if width is None:
                width = len(values)
            elif len(values) != width:
                raise ParseError(f"expected {width} columns, found {len(values)}", lineno)
            rows.append(values)
    if not rows:
        raise EmptyInputError(f"{path}: no numeric rows")
    return np.array(rows, dtype=np.float64)


def load_points(source) -> PointCloud:
    table = read_table(source)
    if not np.all(np.isfinite(table)):
        raise ParseError("point coordinates must be finite")
    return PointCloud(table)


def validate_distance_matrix(values, asym_rtol: float = ASYMMETRY_RTOL,
                             diag_atol: float = DIAGONAL_ATOL) -> DistanceMatrix:
    """Check a raw square table against the metric axioms the spread needs.

    Tolerated asymmetry and diagonal noise are removed (upper triangle wins, diagonal
    set to zero) so the returned matrix is exactly symmetric.
    """
    vals = np.array(values, dtype=np.float64)
    if vals.ndim != 2 or vals.shape[0] != vals.shape[1]:
        raise ValueError(f"distance matrix must be square, got shape {vals.shape}")
    if not np.all(np.isfinite(vals)):
        raise MetricViolationError("distance matrix has non-finite entries")
    if np.any(vals < 0):
        raise MetricViolationError("distance matrix has negative entries")
    if np.any(np.abs(np.diag(vals)) > diag_atol):
        raise MetricViolationError("distance matrix has a nonzero diagonal")
    scale = vals.max() if vals.size else 0.0
    if np.any(np.abs(vals - vals.T) > asym_rtol * scale):
        raise MetricViolationError("distance matrix is not symmetric")
    upper = np.triu(vals, 1)
    vals = upper + upper.T
    return DistanceMatrix(vals)


def load_distance_matrix(source) -> DistanceMatrix:
    return validate_distance_matrix(read_table(source))


def format_float(x: float) -> str:
    return format(float(x), ".17g")


def save_table(path, values: np.ndarray, header: str | None = None) -> None:
    """Write rows as comma-separated values with 17 significant digits."""
    values = np.atleast_2d(np.asarray(values, dtype=np.float64))
    with Path(path).open("w") as fh:
        if header:
            fh.write(header + "\n")
        for row in values:
            fh.write(",".join(format_float(v) for v in row) + "\n")
