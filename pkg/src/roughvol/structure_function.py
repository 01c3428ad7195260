"""Structure-function (moment scaling) estimator of h(q).

m(q, Δ) is the mean of |log σ_{kΔ} - log σ_{(k-1)Δ}|^q over the non-overlapping
lag-Δ increments; its log-log slope against Δ is ζ(q) = q h(q).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DataError, NumericError, ValidationError
from .mfdfa import HurstCurve, fit_power_law
from .volseries import LogVolSeries, lagged_differences


def default_sf_q_grid(q_max: float = 8.0, step: float = 0.2) -> np.ndarray:
    if step <= 0:
        raise ValidationError(f"q step must be positive, got {step}")
    if q_max <= 0:
        raise ValidationError(f"q_max must be positive, got {q_max}")
    n = int(round(q_max / step))
    return np.round(step * np.arange(1, n + 1), 12)


def default_delta_grid(n: int, fit_hi: int = 40, count_ext: int = 10) -> np.ndarray:
    """1..fit_hi, then a geometric extension up to n // 10 for diagnostics.

    Lags leaving fewer than two increments in a series of n points are dropped.
    """
    grid = np.arange(1, fit_hi + 1)
    top = n // 10
    if top > fit_hi:
        grid = np.union1d(grid, np.round(np.geomspace(fit_hi, top, count_ext)).astype(int))
    return grid[(n - 1) // grid >= 2]


@dataclass
class StructureFunctionTable:
    delta: np.ndarray  # (n_delta,)
    q: np.ndarray  # (n_q,)
    m: np.ndarray  # (n_delta, n_q)
    n_terms: np.ndarray


@dataclass
class ZetaCurve:
    q: np.ndarray
    zeta: np.ndarray
    stderr: np.ndarray

    @property
    def h(self) -> np.ndarray:
        return self.zeta / self.q


def _as_logvol(lv) -> LogVolSeries:
    return lv if isinstance(lv, LogVolSeries) else LogVolSeries.from_values(lv)


def sf_moments(lv, q: float, delta: int) -> float:
    if q <= 0:
        raise ValidationError(f"structure functions need q > 0, got {q}")
    d = lagged_differences(_as_logvol(lv), delta)
    if d.size < 2:
        raise DataError(f"only {d.size} increment(s) at lag {delta}; need >= 2")
    return float(np.mean(np.abs(d) ** q))


def sf_table(lv, q_grid, delta_grid) -> StructureFunctionTable:
    lv = _as_logvol(lv)
    q = np.asarray(q_grid, dtype=float)
    delta = np.asarray(delta_grid, dtype=int)
    if np.any(q <= 0):
        raise ValidationError("structure functions need q > 0")
    m = np.empty((delta.size, q.size))
    n_terms = np.empty(delta.size, dtype=int)
    for i, d in enumerate(delta):
        a = np.abs(lagged_differences(lv, int(d)))
        if a.size < 2:
            raise DataError(f"only {a.size} increment(s) at lag {d}; need >= 2")
        n_terms[i] = a.size
        m[i] = np.mean(a[None, :] ** q[:, None], axis=1)
    return StructureFunctionTable(delta=delta, q=q, m=m, n_terms=n_terms)


def sf_hurst(lv, q_grid=None, delta_grid=None, fit_range=(1, 40)):
    """Fit ζ(q) per q over Δ in fit_range; returns (ZetaCurve, HurstCurve, table)."""
    lv = _as_logvol(lv)
    q_grid = default_sf_q_grid() if q_grid is None else np.asarray(q_grid, dtype=float)
    if delta_grid is None:
        delta_grid = default_delta_grid(len(lv), int(fit_range[1]))
    table = sf_table(lv, q_grid, delta_grid)
    lo, hi = fit_range
    in_range = (table.delta >= lo) & (table.delta <= hi)
    if np.count_nonzero(in_range) < 3:
        raise ValidationError(f"need >= 3 lags inside fit range {fit_range}")
    fits = []
    for j, q in enumerate(table.q):
        if np.any(table.m[in_range, j] == 0):
            raise NumericError(f"m(q={q}, Δ) is zero inside the fit range; log undefined")
        fits.append(fit_power_law(table.delta, table.m[:, j], fit_range))
    fits = np.array(fits)
    zeta = ZetaCurve(q=table.q.copy(), zeta=fits[:, 0], stderr=fits[:, 1])
    curve = HurstCurve(
        q=table.q.copy(),
        h=zeta.h,
        stderr=fits[:, 1] / table.q,
        r2=fits[:, 2],
        estimator="structure_function",
        fit_window=tuple(fit_range),
    )
    return zeta, curve, table
