"""Multifractal detrended fluctuation analysis.

Pipeline: profile -> per-scale segment variances (tiling from both ends,
polynomial detrending) -> q-th order fluctuation functions -> log-log
least-squares fit of F_q(s) against s, whose slope is h(q).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import logsumexp

from .errors import NumericError, ValidationError


def default_q_grid(q_min: float = -25.0, q_max: float = 25.0, step: float = 0.5) -> np.ndarray:
    if step <= 0:
        raise ValidationError(f"q step must be positive, got {step}")
    if q_max < q_min:
        raise ValidationError(f"q_max ({q_max}) < q_min ({q_min})")
    n = int(round((q_max - q_min) / step))
    q = q_min + step * np.arange(n + 1)
    # snap values like 1e-16 onto the exact grid point they represent
    return np.round(q, 12)


def default_s_grid(n: int, s_min: int = 16, count: int = 20) -> np.ndarray:
    """~`count` geometrically spaced integer scales in [s_min, n // 4]."""
    s_max = n // 4
    if s_max < s_min:
        raise ValidationError(f"series of length {n} too short for s_min={s_min}")
    s = np.unique(np.round(np.geomspace(s_min, s_max, count)).astype(int))
    return s


@dataclass
class MfdfaConfig:
    q_grid: np.ndarray = field(default_factory=default_q_grid)
    s_grid: np.ndarray | None = None  # None -> default_s_grid(len(x))
    fit_range: tuple[float, float] = (80, 280)
    poly_order: int = 3

    def resolved_s_grid(self, n: int) -> np.ndarray:
        s = default_s_grid(n) if self.s_grid is None else np.asarray(self.s_grid, dtype=int)
        self.validate(s)
        return s

    def validate(self, s_grid: np.ndarray) -> None:
        q = np.asarray(self.q_grid, dtype=float)
        if q.ndim != 1 or q.size == 0:
            raise ValidationError("q_grid must be a non-empty 1-d sequence")
        if np.any(np.diff(q) <= 0):
            raise ValidationError("q_grid must be strictly increasing")
        if self.poly_order < 0:
            raise ValidationError(f"poly_order must be >= 0, got {self.poly_order}")
        if s_grid.size == 0 or np.any(np.diff(s_grid) <= 0):
            raise ValidationError("s_grid must be non-empty and strictly increasing")
        if s_grid[0] < self.poly_order + 2:
            raise ValidationError(
                f"scale s={s_grid[0]} too small for poly_order={self.poly_order} "
                f"(need s >= {self.poly_order + 2})"
            )
        lo, hi = self.fit_range
        if not lo < hi:
            raise ValidationError(f"invalid fit range {self.fit_range}")
        if lo < s_grid[0] or hi > s_grid[-1]:
            raise ValidationError(
                f"fit range {self.fit_range} outside s_grid span [{s_grid[0]}, {s_grid[-1]}]"
            )
        if np.count_nonzero((s_grid >= lo) & (s_grid <= hi)) < 3:
            raise ValidationError(f"fewer than 3 scales of s_grid inside fit range {self.fit_range}")


@dataclass
class FluctuationTable:
    s: np.ndarray  # (n_s,)
    q: np.ndarray  # (n_q,)
    F: np.ndarray  # (n_s, n_q)
    n_segments: np.ndarray  # 2 * N_s per scale


@dataclass
class HurstCurve:
    q: np.ndarray
    h: np.ndarray
    stderr: np.ndarray
    r2: np.ndarray
    estimator: str  # "mfdfa" or "structure_function"
    fit_window: tuple[float, float]

    def at(self, q: float) -> float:
        idx = np.flatnonzero(np.isclose(self.q, q, rtol=0, atol=1e-9))
        if idx.size == 0:
            raise KeyError(f"q={q} not on the curve")
        return float(self.h[idx[0]])


def profile(x) -> np.ndarray:
    """Cumulative sum of mean-removed values, Y(i) = sum_{j<=i} (x_j - <x>)."""
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or x.size < 2:
        raise ValidationError("profile needs a 1-d series with at least 2 values")
    return np.cumsum(x - x.mean())


def _residual_projector(s: int, poly_order: int) -> np.ndarray:
    # Orthonormal basis of degree<=poly_order polynomials on s points; residual = Y - Q Q^T Y.
    t = np.linspace(-1.0, 1.0, s)
    vander = np.vander(t, poly_order + 1, increasing=True)
    Q, _ = np.linalg.qr(vander)
    return Q


def segment_variances(Y, s: int, poly_order: int = 3) -> np.ndarray:
    """Mean squared detrending residual for each of the 2*N_s segments.

    The first N_s segments tile the profile from the start, the last N_s
    from the end. Variances divide by s.
    """
    Y = np.asarray(Y, dtype=float)
    n = Y.size
    s = int(s)
    if s < poly_order + 2:
        raise ValidationError(f"s={s} too small for poly_order={poly_order}")
    if s > n:
        raise ValidationError(f"s={s} exceeds series length {n}")
    ns = n // s
    forward = Y[: ns * s].reshape(ns, s)
    backward = Y[n - ns * s :].reshape(ns, s)[::-1]
    segs = np.concatenate([forward, backward])
    Q = _residual_projector(s, poly_order)
    resid = segs - (segs @ Q) @ Q.T
    return np.mean(resid**2, axis=1)


def fluctuation_function(variances, q: float) -> float:
    """q-th order average of segment fluctuations; q = 0 uses the log average.

    Computed in log space so that |q| up to a few dozen stays finite.
    """
    v = np.asarray(variances, dtype=float)
    if v.size == 0:
        raise ValidationError("no segment variances")
    if np.any(v < 0) or not np.all(np.isfinite(v)):
        raise NumericError("segment variances must be finite and non-negative")
    zero = np.flatnonzero(v == 0)
    if zero.size and q <= 0:
        raise NumericError(
            f"segment {int(zero[0]) + 1} has zero variance; F_q undefined for q={q}"
        )
    if q == 0:
        return float(np.exp(0.5 * np.mean(np.log(v))))
    with np.errstate(divide="ignore"):
        logv = np.log(v)
    # (1/q) * log( mean( v^(q/2) ) )
    log_mean = logsumexp(0.5 * q * logv) - np.log(v.size)
    return float(np.exp(log_mean / q))


def _ols(x: np.ndarray, y: np.ndarray) -> tuple[float, float, float]:
    """Slope, slope standard error and r^2 of y on x."""
    n = x.size
    xm, ym = x.mean(), y.mean()
    sxx = np.sum((x - xm) ** 2)
    slope = np.sum((x - xm) * (y - ym)) / sxx
    intercept = ym - slope * xm
    resid = y - (intercept + slope * x)
    ss_res = float(np.sum(resid**2))
    ss_tot = float(np.sum((y - ym) ** 2))
    stderr = float(np.sqrt(ss_res / (n - 2) / sxx)) if n > 2 else float("nan")
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    return float(slope), stderr, float(r2)


def fit_power_law(x, y, fit_range: tuple[float, float]) -> tuple[float, float, float]:
    """OLS of ln y on ln x over points with x inside fit_range (inclusive)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    lo, hi = fit_range
    mask = (x >= lo) & (x <= hi)
    if mask.sum() < 3:
        raise ValidationError(
            f"need >= 3 grid points in fit range [{lo}, {hi}], found {int(mask.sum())}"
        )
    ys = y[mask]
    if not np.all(np.isfinite(ys)) or np.any(ys <= 0):
        raise NumericError(f"non-finite or non-positive values inside fit range [{lo}, {hi}]")
    return _ols(np.log(x[mask]), np.log(ys))


def hurst_fit(table: FluctuationTable, q: float, fit_range: tuple[float, float]):
    """(h, stderr, r2) for one q from the fluctuation table."""
    idx = np.flatnonzero(np.isclose(table.q, q, rtol=0, atol=1e-9))
    if idx.size == 0:
        raise ValidationError(f"q={q} not in fluctuation table")
    return fit_power_law(table.s, table.F[:, idx[0]], fit_range)


def fluctuation_table(x, s_grid, q_grid, poly_order: int = 3) -> FluctuationTable:
    Y = profile(x)
    s_grid = np.asarray(s_grid, dtype=int)
    q_grid = np.asarray(q_grid, dtype=float)
    if s_grid.max() > Y.size:
        raise ValidationError(f"largest scale {s_grid.max()} exceeds series length {Y.size}")
    F = np.empty((s_grid.size, q_grid.size))
    n_seg = np.empty(s_grid.size, dtype=int)
    for i, s in enumerate(s_grid):
        v = segment_variances(Y, s, poly_order)
        n_seg[i] = v.size
        for j, q in enumerate(q_grid):
            try:
                F[i, j] = fluctuation_function(v, q)
            except NumericError as exc:
                raise NumericError(f"s={s}: {exc}") from exc
    return FluctuationTable(s=s_grid, q=q_grid, F=F, n_segments=n_seg)


def mfdfa_analyze(x, cfg: MfdfaConfig | None = None) -> tuple[FluctuationTable, HurstCurve]:
    cfg = cfg or MfdfaConfig()
    x = np.asarray(x, dtype=float)
    s_grid = cfg.resolved_s_grid(x.size)
    if x.size < s_grid[-1]:
        raise ValidationError(f"series length {x.size} < largest scale {s_grid[-1]}")
    if np.ptp(x) == 0:
        raise NumericError("constant input series: every segment variance is zero")
    table = fluctuation_table(x, s_grid, cfg.q_grid, cfg.poly_order)
    fits = np.array([hurst_fit(table, q, cfg.fit_range) for q in table.q])
    curve = HurstCurve(
        q=table.q.copy(),
        h=fits[:, 0],
        stderr=fits[:, 1],
        r2=fits[:, 2],
        estimator="mfdfa",
        fit_window=tuple(cfg.fit_range),
    )
    return table, curve
