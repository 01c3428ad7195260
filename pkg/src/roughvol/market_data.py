"""Tick data -> intraday price grid -> log returns -> daily realized variance."""

from __future__ import annotations

import csv
import datetime as dt
import io
import logging
from dataclasses import dataclass, field

import numpy as np

from .errors import DataError, ValidationError

logger = logging.getLogger(__name__)

SECONDS_PER_DAY = 86400
MINUTES_PER_DAY = 1440
EPOCH = dt.date(1970, 1, 1)

FILL_PREVIOUS_TICK = "previous_tick"


@dataclass
class TickSeries:
    timestamps: np.ndarray  # seconds since epoch, UTC
    prices: np.ndarray
    volumes: np.ndarray
    instrument_label: str = ""
    n_malformed: int = 0
    n_rejected: int = 0  # non-positive prices
    n_reordered: int = 0

    def __len__(self) -> int:
        return self.timestamps.size


@dataclass
class PriceGrid:
    delta_t_minutes: int
    dates: list[dt.date]
    prices: np.ndarray  # (n_days, M + 1)
    fill_policy: str = FILL_PREVIOUS_TICK
    dropped_days: list[dt.date] = field(default_factory=list)

    @property
    def m(self) -> int:
        return MINUTES_PER_DAY // self.delta_t_minutes


@dataclass
class ReturnGrid:
    delta_t_minutes: int
    dates: list[dt.date]
    returns: np.ndarray  # (n_days, M)


@dataclass
class RVSeries:
    dates: list[dt.date]
    rv: np.ndarray
    delta_t_minutes: int | None = None  # None when loaded from a precomputed file

    def __post_init__(self):
        self.rv = np.asarray(self.rv, dtype=float)
        if len(self.dates) != self.rv.size:
            raise ValidationError("dates and rv differ in length")
        if np.any(self.rv < 0) or not np.all(np.isfinite(self.rv)):
            raise DataError("realized variance must be finite and non-negative")
        if any(b <= a for a, b in zip(self.dates, self.dates[1:])):
            raise DataError("RV dates must be strictly increasing")

    def scaled(self, c: float) -> RVSeries:
        return RVSeries(list(self.dates), self.rv * c, self.delta_t_minutes)


def _check_delta_t(delta_t_minutes: int) -> int:
    if int(delta_t_minutes) != delta_t_minutes or delta_t_minutes <= 0:
        raise ValidationError(f"delta_t must be a positive integer, got {delta_t_minutes}")
    if MINUTES_PER_DAY % delta_t_minutes:
        raise ValidationError(f"delta_t must divide 1440, got {delta_t_minutes}")
    return int(delta_t_minutes)


def parse_ticks(source, fmt: str = "bitcoincharts_csv", label: str = "") -> TickSeries:
    """Parse headerless ``timestamp,price,volume`` rows.

    `source` may be bytes, str, or a binary/text file object. Malformed rows
    and rows with non-positive price are skipped and counted; rows are
    stably sorted by timestamp if they arrive out of order.
    """
    if fmt != "bitcoincharts_csv":
        raise ValidationError(f"unsupported tick format {fmt!r}")
    try:
        if isinstance(source, (bytes, bytearray)):
            text = source.decode("utf-8")
        elif isinstance(source, str):
            text = source
        else:
            raw = source.read()
            text = raw.decode("utf-8") if isinstance(raw, (bytes, bytearray)) else raw
    except (OSError, UnicodeDecodeError) as exc:
        raise DataError(f"cannot read tick source: {exc}") from exc

    ts, px, vol = [], [], []
    malformed = rejected = 0
    for row in csv.reader(io.StringIO(text)):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != 3:
            malformed += 1
            continue
        try:
            t, p, v = (float(c) for c in row)
        except ValueError:
            malformed += 1
            continue
        if not (np.isfinite(t) and np.isfinite(p) and np.isfinite(v)) or v < 0:
            malformed += 1
            continue
        if p <= 0:
            rejected += 1
            continue
        ts.append(t)
        px.append(p)
        vol.append(v)

    if not ts:
        raise DataError("no records")
    ts_a = np.array(ts)
    reordered = int(np.count_nonzero(ts_a < np.maximum.accumulate(ts_a)))
    order = np.argsort(ts_a, kind="stable")
    if malformed or rejected or reordered:
        logger.warning(
            "ticks: %d malformed, %d non-positive price, %d out of order",
            malformed, rejected, reordered,
        )
    return TickSeries(
        timestamps=ts_a[order],
        prices=np.array(px)[order],
        volumes=np.array(vol)[order],
        instrument_label=label,
        n_malformed=malformed,
        n_rejected=rejected,
        n_reordered=reordered,
    )


def resample(ticks: TickSeries, delta_t_minutes: int = 5, day_min_ticks: int = 100) -> PriceGrid:
    """Previous-tick prices on the grid 00:00, δt, ..., 24:00 of each UTC day.

    A grid instant takes the price of the last tick at or before it; if no
    tick precedes it at all, the day's first tick is used. Days with fewer
    than `day_min_ticks` ticks in [00:00, 24:00) are dropped.
    """
    delta_t_minutes = _check_delta_t(delta_t_minutes)
    if len(ticks) == 0:
        raise DataError("no records")
    m = MINUTES_PER_DAY // delta_t_minutes
    t = ticks.timestamps
    day_idx = np.floor(t / SECONDS_PER_DAY).astype(np.int64)
    days, counts = np.unique(day_idx, return_counts=True)
    keep = counts >= day_min_ticks
    dropped = [EPOCH + dt.timedelta(days=int(d)) for d in days[~keep]]
    if dropped:
        logger.info("dropped %d day(s) with fewer than %d ticks", len(dropped), day_min_ticks)
    days = days[keep]
    if days.size == 0:
        raise DataError(f"no day has at least {day_min_ticks} ticks")

    offsets = np.arange(m + 1) * (delta_t_minutes * 60)
    grid_t = days[:, None] * SECONDS_PER_DAY + offsets[None, :]
    pos = np.searchsorted(t, grid_t, side="right") - 1
    # before the first tick of the series: fall back to that day's first tick
    first_of_day = np.searchsorted(t, days * SECONDS_PER_DAY, side="left")
    pos = np.where(pos < 0, first_of_day[:, None], pos)
    return PriceGrid(
        delta_t_minutes=delta_t_minutes,
        dates=[EPOCH + dt.timedelta(days=int(d)) for d in days],
        prices=ticks.prices[pos],
        dropped_days=dropped,
    )


def intraday_returns(grid: PriceGrid) -> ReturnGrid:
    p = np.asarray(grid.prices, dtype=float)
    if p.ndim != 2 or p.shape[1] != grid.m + 1:
        raise ValidationError("price grid must have M + 1 prices per day")
    if np.any(p <= 0):
        raise DataError("grid prices must be positive")
    # log of the price ratio: exact under power-of-two price rescaling
    return ReturnGrid(grid.delta_t_minutes, list(grid.dates), np.log(p[:, 1:] / p[:, :-1]))


def daily_rv(returns: ReturnGrid) -> RVSeries:
    return RVSeries(list(returns.dates), np.sum(returns.returns**2, axis=1), returns.delta_t_minutes)


def realized_variance(ticks: TickSeries, delta_t_minutes: int = 5, day_min_ticks: int = 100) -> RVSeries:
    return daily_rv(intraday_returns(resample(ticks, delta_t_minutes, day_min_ticks)))


def signature_curve(ticks: TickSeries, delta_t_list, day_min_ticks: int = 100) -> list[tuple[int, float]]:
    """Mean daily RV per sampling period, over days retained at every period."""
    delta_t_list = [_check_delta_t(d) for d in delta_t_list]
    if not delta_t_list:
        raise ValidationError("empty sampling-period list")
    series = [realized_variance(ticks, d, day_min_ticks) for d in delta_t_list]
    common = set(series[0].dates)
    for s in series[1:]:
        common &= set(s.dates)
    if not common:
        raise DataError("no day retained at every sampling period")
    rows = []
    for d, s in zip(delta_t_list, series):
        mask = np.array([day in common for day in s.dates])
        rows.append((d, float(np.mean(s.rv[mask]))))
    return rows


def read_rv_csv(source) -> RVSeries:
    """Read ``date,rv`` CSV (header required, ISO-8601 dates)."""
    text = source.read() if hasattr(source, "read") else source
    if isinstance(text, bytes):
        text = text.decode("utf-8")
    reader = csv.reader(io.StringIO(text))
    header = next(reader, None)
    if header is None or [h.strip() for h in header] != ["date", "rv"]:
        raise DataError("RV file must start with header 'date,rv'")
    dates, rv = [], []
    for lineno, row in enumerate(reader, start=2):
        if not row:
            continue
        try:
            dates.append(dt.date.fromisoformat(row[0].strip()))
            rv.append(float(row[1]))
        except (ValueError, IndexError) as exc:
            raise DataError(f"line {lineno}: {exc}") from exc
    if not dates:
        raise DataError("no records")
    return RVSeries(dates, np.array(rv))
