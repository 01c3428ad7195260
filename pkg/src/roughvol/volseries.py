"""Log-volatility, lagged increments, shuffle surrogates and distribution diagnostics."""

from __future__ import annotations

import datetime as dt
import logging
from dataclasses import dataclass

import numpy as np

from .errors import DataError, NumericError, ValidationError
from .market_data import RVSeries

logger = logging.getLogger(__name__)


@dataclass
class LogVolSeries:
    dates: list[dt.date] | None
    logvol: np.ndarray
    # Underlying RV, when known. Increments are then taken as 0.5*log(rv_b/rv_a),
    # which is exactly invariant under power-of-two rescaling of the RV.
    rv: np.ndarray | None = None
    n_zero_dropped: int = 0

    def __len__(self) -> int:
        return self.logvol.size

    @classmethod
    def from_values(cls, logvol, dates=None) -> LogVolSeries:
        return cls(dates=dates, logvol=np.asarray(logvol, dtype=float))


@dataclass
class IncrementSeries:
    values: np.ndarray
    lag_days: int = 1
    origin_label: str = ""

    def __len__(self) -> int:
        return self.values.size


@dataclass
class DistributionSummary:
    mean: float
    std: float
    kurtosis: float
    bin_centers: np.ndarray
    density: np.ndarray
    gaussian_density: np.ndarray


def log_vol(rv: RVSeries) -> LogVolSeries:
    """log sigma_t = 0.5 * ln(RV_t); zero-RV days are dropped and counted."""
    keep = rv.rv > 0
    n_zero = int(np.count_nonzero(~keep))
    if not keep.any():
        raise DataError("every day has zero realized variance")
    if n_zero:
        logger.warning("dropped %d zero-RV day(s) before taking logs", n_zero)
    kept_rv = rv.rv[keep]
    dates = [d for d, k in zip(rv.dates, keep) if k]
    return LogVolSeries(dates=dates, logvol=0.5 * np.log(kept_rv), rv=kept_rv, n_zero_dropped=n_zero)


def lagged_differences(lv: LogVolSeries, lag: int) -> np.ndarray:
    """Non-overlapping lag-`lag` differences over the retained-day index, starting at index 0."""
    if int(lag) != lag or lag < 1:
        raise ValidationError(f"lag must be a positive integer, got {lag}")
    if len(lv) < lag + 1:
        raise DataError(f"log-volatility series of length {len(lv)} too short for lag {lag}")
    if lv.rv is not None:
        r = lv.rv[::lag]
        return 0.5 * np.log(r[1:] / r[:-1])
    return np.diff(lv.logvol[::lag])


def increments(lv: LogVolSeries, lag_days: int = 1, label: str = "") -> IncrementSeries:
    return IncrementSeries(lagged_differences(lv, lag_days), int(lag_days), label)


def shuffle(inc: IncrementSeries, seed: int) -> IncrementSeries:
    """Uniform random permutation of the increments.

    Uses ``numpy.random.Generator(PCG64(seed)).permutation``, a Fisher-Yates
    shuffle; the same seed always yields the same permutation.
    """
    if len(inc) == 0:
        raise DataError("cannot shuffle an empty series")
    rng = np.random.Generator(np.random.PCG64(seed))
    return IncrementSeries(rng.permutation(inc.values), inc.lag_days, f"{inc.origin_label}|shuffled:{seed}")


def kurtosis(x) -> float:
    """Pearson (non-excess) kurtosis m4 / m2**2 from central moments."""
    x = np.asarray(x, dtype=float)
    d = x - x.mean()
    m2 = np.mean(d**2)
    if m2 == 0:
        raise NumericError("zero variance: kurtosis undefined")
    return float(np.mean(d**4) / m2**2)


def distribution_summary(inc: IncrementSeries, n_bins: int = 50) -> DistributionSummary:
    x = np.asarray(inc.values, dtype=float)
    if x.size < 4:
        raise DataError("need at least 4 values for a distribution summary")
    if n_bins < 1:
        raise ValidationError(f"n_bins must be positive, got {n_bins}")
    k = kurtosis(x)
    mean = float(x.mean())
    std = float(x.std())
    density, edges = np.histogram(x, bins=n_bins, range=(x.min(), x.max()), density=True)
    centers = 0.5 * (edges[:-1] + edges[1:])
    gauss = np.exp(-0.5 * ((centers - mean) / std) ** 2) / (std * np.sqrt(2.0 * np.pi))
    return DistributionSummary(mean, std, k, centers, density, gauss)
