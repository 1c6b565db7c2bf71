"""Summary statistics, percentage gains and empirical CDFs of path-loss maps."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .composition import PathLossMap


class EmptyCoverageError(ValueError):
    """The map has no finite path-loss value to reduce."""


@dataclass(frozen=True)
class SummaryStats:
    pl_min: float
    pl_max: float
    pl_avg: float
    scenario: str
    finite_count: int
    excluded_count: int = 0

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.pl_min, self.pl_max, self.pl_avg)


@dataclass(frozen=True)
class GainReport:
    g_min: float
    g_max: float
    g_avg: float
    reference: str = "BS"
    subject: str = "RIS"

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.g_min, self.g_max, self.g_avg)


@dataclass(frozen=True)
class CdfSeries:
    pl: np.ndarray
    fraction: np.ndarray

    def __len__(self):
        return len(self.pl)

    def at(self, level: float) -> float:
        """Fraction of finite MPs with path loss <= ``level``."""
        k = np.searchsorted(self.pl, level, side="right")
        return 0.0 if k == 0 else float(self.fraction[k - 1])


def _finite_values(values, mask=None) -> tuple[np.ndarray, int]:
    v = np.asarray(values, dtype=float).ravel()
    keep = np.isfinite(v)
    if mask is not None:
        keep &= ~np.asarray(mask, dtype=bool).ravel()
    return v[keep], int(v.size - keep.sum())


def summarize(pl_map: PathLossMap | np.ndarray, scenario: str | None = None, exclude=None) -> SummaryStats:
    """Minimum, maximum and mean path loss over the finite MPs.

    ``exclude`` is an optional boolean mask (e.g. building footprints) of
    MPs to leave out; excluded and infinite points are counted in
    ``excluded_count``.
    """
    if isinstance(pl_map, PathLossMap):
        values, scenario = pl_map.values, scenario or pl_map.scenario
    else:
        values = pl_map
    v, dropped = _finite_values(values, exclude)
    if v.size == 0:
        raise EmptyCoverageError("map has no finite path-loss values")
    avg = math.fsum(v.tolist()) / v.size
    lo, hi = float(v.min()), float(v.max())
    # the mean of a constant field must not drift outside [min, max]
    avg = min(max(avg, lo), hi)
    return SummaryStats(lo, hi, avg, scenario or "", int(v.size), dropped)


def gains(reference: SummaryStats, subject: SummaryStats) -> GainReport:
    """Percentage reduction of each statistic relative to the reference scenario."""
    ref = reference.as_tuple()
    if any(r == 0 for r in ref):
        raise ZeroDivisionError("reference statistics must be non-zero")
    if any(r < 0 for r in ref):
        raise ValueError("reference statistics must be positive")
    g = [(1.0 - s / r) * 100.0 for s, r in zip(subject.as_tuple(), ref)]
    return GainReport(g[0], g[1], g[2], reference.scenario, subject.scenario)


def cdf(pl_map: PathLossMap | np.ndarray, exclude=None) -> CdfSeries:
    """Empirical CDF: for each distinct value, the fraction of finite MPs at or below it."""
    values = pl_map.values if isinstance(pl_map, PathLossMap) else pl_map
    v, _ = _finite_values(values, exclude)
    if v.size == 0:
        raise EmptyCoverageError("map has no finite path-loss values")
    levels, counts = np.unique(v, return_counts=True)
    cum = np.cumsum(counts)
    return CdfSeries(levels, cum / v.size)
