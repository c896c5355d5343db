"""Delta-method standard errors and confidence intervals for the pseudo spread dimension."""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Literal

import numpy as np

from .spread import PhiSample, PsiSample

Variant = Literal["single-cov", "textbook"]
VARIANTS = ("single-cov", "textbook")

Z95 = 1.96


class NegativeVarianceWarning(RuntimeWarning):
    """The propagated variance came out negative and was clamped to zero."""


@dataclass(frozen=True)
class DimensionEstimateAtScale:
    t: float
    estimate: float
    variance: float
    se: float
    ci_low: float
    ci_high: float
    z: float = Z95


def _sample(values, name: str = "sample") -> np.ndarray:
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim != 1:
        raise ValueError(f"{name} must be 1-dimensional")
    if arr.size == 0:
        raise ValueError(f"{name} must be nonempty")
    return arr


def population_variance(sample) -> float:
    """Mean squared deviation from the mean (divisor len(sample))."""
    a = _sample(sample)
    dev = a - a.mean()
    return float(np.mean(dev * dev))


def population_covariance(a, b) -> float:
    a = _sample(a, "a")
    b = _sample(b, "b")
    if a.size != b.size:
        raise ValueError(f"length mismatch: {a.size} != {b.size}")
    return float(np.mean((a - a.mean()) * (b - b.mean())))


def _check_variant(variant: str) -> None:
    if variant not in VARIANTS:
        raise ValueError(f"variant must be one of {VARIANTS}, got {variant!r}")


def ratio_variance(mean_a, mean_b, var_a, var_b, cov_ab, variant: Variant = "single-cov"):
    """First-order variance of ``mean_a / mean_b``.

    Evaluates (A/B)^2 (Var a / A^2 + Var b / B^2 - c Cov(a, b) / (A B)) in the
    expanded form

        Var a / B^2 + (A/B)^2 Var b / B^2 - c (A/B) Cov(a, b) / B^2

    which is identical for A != 0 and stays finite at A = 0. ``c`` is 1 for the
    ``"single-cov"`` variant and 2 for the ``"textbook"`` delta method.

    Works elementwise on arrays. Raises ``ZeroDivisionError`` if any mean_b is 0.
    """
    _check_variant(variant)
    mean_b = np.asarray(mean_b, dtype=np.float64)
    if np.any(mean_b == 0):
        raise ZeroDivisionError("mean_b must be nonzero")
    c = 1.0 if variant == "single-cov" else 2.0
    ratio = np.asarray(mean_a, dtype=np.float64) / mean_b
    b2 = mean_b * mean_b
    out = var_a / b2 + ratio * ratio * var_b / b2 - c * ratio * cov_ab / b2
    return float(out) if np.ndim(out) == 0 else out


def _moments(psi_vals: np.ndarray, phi_vals: np.ndarray):
    """Means, population variances and covariance along the last axis."""
    mean_psi = np.mean(psi_vals, axis=-1)
    mean_phi = np.mean(phi_vals, axis=-1)
    dpsi = psi_vals - mean_psi[..., None]
    dphi = phi_vals - mean_phi[..., None]
    var_psi = np.mean(dpsi * dpsi, axis=-1)
    var_phi = np.mean(dphi * dphi, axis=-1)
    cov = np.mean(dphi * dpsi, axis=-1)
    return mean_phi, mean_psi, var_phi, var_psi, cov


def raw_dimension_variances(ts, psi_vals, phi_vals, variant: Variant = "single-cov") -> np.ndarray:
    """Unclamped propagated variance of t * mean(phi) / mean(psi) per scale.

    ``psi_vals`` and ``phi_vals`` have shape (len(ts), k).
    """
    ts = np.asarray(ts, dtype=np.float64)
    mean_phi, mean_psi, var_phi, var_psi, cov = _moments(
        np.atleast_2d(psi_vals), np.atleast_2d(phi_vals)
    )
    return ts * ts * ratio_variance(mean_phi, mean_psi, var_phi, var_psi, cov, variant)


def clamp_variances(raw) -> tuple[np.ndarray, int]:
    """Replace negative variances by 0; returns the clamped array and how many were hit."""
    raw = np.asarray(raw, dtype=np.float64)
    negative = raw < 0
    return np.where(negative, 0.0, raw), int(negative.sum())


def dimension_variance(psi: PsiSample, phi: PhiSample, t: float | None = None,
                       variant: Variant = "single-cov") -> float:
    """Propagated variance of the pseudo spread dimension at one scale, clamped at 0."""
    if t is None:
        t = psi.t
    if psi.k != phi.k or psi.n != phi.n or psi.t != phi.t or psi.t != t:
        raise ValueError("psi and phi samples must come from the same subset and scale")
    raw = raw_dimension_variances([t], psi.values[None, :], phi.values[None, :], variant)
    clamped, hits = clamp_variances(raw)
    if hits:
        warnings.warn(f"negative propagated variance {raw[0]:.3g} clamped to 0 at t={t}",
                      NegativeVarianceWarning, stacklevel=2)
    return float(clamped[0])


def confidence_interval(estimate: float, variance: float, k: int, z: float = Z95,
                        t: float = float("nan")) -> DimensionEstimateAtScale:
    """estimate +/- z * sqrt(variance) / sqrt(k)."""
    if k < 1:
        raise ValueError("subset size k must be at least 1")
    if variance < 0:
        raise ValueError("variance must be nonnegative")
    se = math.sqrt(variance) / math.sqrt(k)
    half = z * se
    return DimensionEstimateAtScale(
        t=float(t), estimate=float(estimate), variance=float(variance), se=se,
        ci_low=estimate - half, ci_high=estimate + half, z=float(z),
    )
