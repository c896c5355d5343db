"""Dimension profiles with confidence bands, peak/plateau read-off, and CI coverage runs."""
from __future__ import annotations

import csv
import json
import logging
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Optional

import numpy as np

from .datasets import RNG_ALGORITHM, SUBSET_STREAM, sample_subset, swiss_roll
from .metric_space import (
    MetricSpace,
    EmptyInputError,
    ParseError,
    PointCloud,
    SubsetIndex,
    format_float,
    space_size,
)
from .spread import ScaleGrid, full_sweep, growth_from_samples, space_psi_phi
from .uncertainty import (
    Z95,
    DimensionEstimateAtScale,
    Variant,
    clamp_variances,
    raw_dimension_variances,
)

log = logging.getLogger(__name__)

PROFILE_COLUMNS = ("t", "estimate", "se", "ci_low", "ci_high")
TRUTH_DEFINITION = "spread dimension of the full finite sample (pseudo spread dimension with S = X)"

PLATEAU_BAND = 0.25
PLATEAU_MIN_FRACTION = 0.1


@dataclass(frozen=True, eq=False)
class DimensionProfile:
    grid: ScaleGrid
    records: tuple[DimensionEstimateAtScale, ...]
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if len(self.records) != len(self.grid):
            raise ValueError("one record per grid value is required")

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(r, name) for r in self.records], dtype=np.float64)

    @property
    def estimates(self) -> np.ndarray:
        return self.column("estimate")

    def to_dict(self) -> dict:
        return {
            "grid": self.grid.values.tolist(),
            "records": [asdict(r) for r in self.records],
            "meta": self.meta,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "DimensionProfile":
        records = tuple(DimensionEstimateAtScale(**r) for r in data["records"])
        return cls(ScaleGrid(data["grid"]), records, dict(data.get("meta", {})))


@dataclass(frozen=True)
class DimensionEstimate:
    value: float
    plateau_level: Optional[int]
    plateau_length: float
    t_at_peak: float


@dataclass(frozen=True)
class CoverageReport:
    trials: int
    scales_per_trial: int
    hits: int
    coverage: float
    config: dict

    def to_dict(self) -> dict:
        return asdict(self)


def dimension_profile(space: MetricSpace, subset: SubsetIndex, grid: ScaleGrid,
                      z: float = Z95, variant: Variant = "single-cov") -> DimensionProfile:
    """Pseudo spread dimension with delta-method confidence intervals on ``grid``.

    Works from the k x n partial distance matrix only.
    """
    n = space_size(space)
    if subset.n != n:
        raise ValueError(f"subset indexes a space of size {subset.n}, space has {n} points")
    ts = grid.values
    psi_vals, phi_vals = space_psi_phi(space, subset, ts)
    estimates = growth_from_samples(ts, psi_vals, phi_vals)
    variances, n_clamped = clamp_variances(raw_dimension_variances(ts, psi_vals, phi_vals, variant))
    if n_clamped:
        log.warning("%d negative propagated variances clamped to 0", n_clamped)
    se = np.sqrt(variances) / math.sqrt(subset.k)
    half = z * se
    records = tuple(
        DimensionEstimateAtScale(
            t=float(t), estimate=float(e), variance=float(v), se=float(s),
            ci_low=float(e - h), ci_high=float(e + h), z=float(z),
        )
        for t, e, v, s, h in zip(ts, estimates, variances, se, half)
    )
    meta = {"n": n, "k": subset.k, "variant": variant, "z": float(z), "clamped_variances": n_clamped}
    return DimensionProfile(grid, records, meta)


def plateau_length(ts, estimates, level: float, band: float = PLATEAU_BAND) -> float:
    """t-extent of the longest contiguous run with |estimate - level| < band (0 if none)."""
    ts = np.asarray(ts, dtype=np.float64)
    inside = np.abs(np.asarray(estimates, dtype=np.float64) - level) < band
    best = 0.0
    start = None
    for i, flag in enumerate(inside):
        if flag and start is None:
            start = i
        if start is not None and (not flag or i == len(inside) - 1):
            stop = i if flag else i - 1
            best = max(best, float(ts[stop] - ts[start]))
            start = None
    return best


def estimate_intrinsic_dimension(profile: DimensionProfile, band: float = PLATEAU_BAND,
                                 min_fraction: float = PLATEAU_MIN_FRACTION) -> DimensionEstimate:
    """Read the intrinsic dimension off a profile.

    The peak is the profile maximum. The nearest integer m >= 1 to the peak is
    reported as a plateau level when the longest run within ``band`` of m spans
    more than ``min_fraction`` of the grid. A profile peaking below 0.5 has no
    plateau.
    """
    if len(profile.records) == 0:
        raise ValueError("empty profile")
    ts = profile.grid.values
    est = profile.estimates
    i_peak = int(np.argmax(est))
    value = float(est[i_peak])
    level = int(math.floor(value + 0.5))
    if level < 1:
        return DimensionEstimate(value, None, 0.0, float(ts[i_peak]))
    length = plateau_length(ts, est, level, band)
    plateau = level if length > min_fraction * profile.grid.span else None
    return DimensionEstimate(value, plateau, length, float(ts[i_peak]))


def trial_seed(seed: int, trial: int) -> int:
    """Seed of one coverage trial, derived from the master seed and the trial index only."""
    ss = np.random.SeedSequence(seed, spawn_key=(trial,))
    return int(ss.generate_state(1, np.uint64)[0])


def swiss_roll_sample(n: int, k: int, seed: int) -> tuple[PointCloud, SubsetIndex]:
    """A Swiss roll of n points and a random k-subset, from independent streams of ``seed``."""
    return swiss_roll(n, seed), sample_subset(n, k, seed, SUBSET_STREAM)


def coverage_trial(n: int, k: int, grid: ScaleGrid, seed: int, z: float = Z95,
                   variant: Variant = "single-cov") -> np.ndarray:
    """Per-scale hit flags for one Swiss roll sample: truth inside the CI."""
    cloud, subset = swiss_roll_sample(n, k, seed)
    truth = full_sweep(cloud, grid).dimension_values
    prof = dimension_profile(cloud, subset, grid, z, variant)
    lo, hi = prof.column("ci_low"), prof.column("ci_high")
    return (lo <= truth) & (truth <= hi)


def coverage_validation(trials: int, n: int, k: int, grid: ScaleGrid, seed: int,
                        variant: Variant = "single-cov", z: float = Z95) -> CoverageReport:
    """Pooled fraction of (trial, scale) pairs whose CI contains the full-sample value.

    t = 0 is dropped from ``grid``: the interval there is degenerate and always hits.
    """
    if trials < 1:
        raise ValueError("trials must be at least 1")
    if not 1 <= k <= n:
        raise ValueError(f"need 1 <= k <= n, got k={k}, n={n}")
    scales = grid.positive()
    seeds = [trial_seed(seed, i) for i in range(trials)]
    per_trial = []
    for i, s in enumerate(seeds):
        flags = coverage_trial(n, k, scales, s, z, variant)
        per_trial.append(int(flags.sum()))
        log.info("trial %d/%d: %d/%d hits", i + 1, trials, per_trial[-1], len(scales))
    hits = sum(per_trial)
    config = {
        "n": n, "k": k, "seed": seed, "variant": variant, "z": z,
        "grid": scales.values.tolist(), "trial_seeds": seeds, "hits_per_trial": per_trial,
        "truth": TRUTH_DEFINITION, "rng": RNG_ALGORITHM,
    }
    return CoverageReport(trials, len(scales), hits, hits / (trials * len(scales)), config)


# ---------------------------------------------------------------------------
# serialisation

def write_profile_csv(profile: DimensionProfile, path) -> None:
    with Path(path).open("w", newline="") as fh:
        fh.write(",".join(PROFILE_COLUMNS) + "\n")
        for r in profile.records:
            fh.write(",".join(format_float(getattr(r, c)) for c in PROFILE_COLUMNS) + "\n")


def read_profile_csv(path) -> DimensionProfile:
    """Load a profile CSV. The variance column is not stored, so records carry NaN there."""
    path = Path(path)
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise EmptyInputError(f"{path}: empty profile file") from None
        if tuple(h.strip() for h in header) != PROFILE_COLUMNS:
            raise ParseError(f"expected header {','.join(PROFILE_COLUMNS)}", 1)
        rows = []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(PROFILE_COLUMNS):
                raise ParseError(f"expected {len(PROFILE_COLUMNS)} columns, found {len(row)}", lineno)
            try:
                rows.append([float(c) for c in row])
            except ValueError:
                raise ParseError("non-numeric cell", lineno) from None
    if not rows:
        raise EmptyInputError(f"{path}: profile has no rows")
    table = np.array(rows)
    records = []
    for t, est, se, lo, hi in table:
        z = (hi - lo) / (2 * se) if se > 0 else float("nan")
        records.append(DimensionEstimateAtScale(
            t=float(t), estimate=float(est), variance=float("nan"), se=float(se),
            ci_low=float(lo), ci_high=float(hi), z=float(z),
        ))
    return DimensionProfile(ScaleGrid(table[:, 0]), tuple(records), {"source": str(path)})


def write_json(data: Any, path) -> None:
    Path(path).write_text(json.dumps(data, indent=2, sort_keys=True) + "\n")
