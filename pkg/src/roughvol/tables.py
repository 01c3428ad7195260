"""CSV readers/writers for the plot-ready tables the CLI exchanges."""

from __future__ import annotations

import csv
import io
from pathlib import Path

import numpy as np

from .errors import DataError
from .market_data import RVSeries, read_rv_csv
from .mfdfa import FluctuationTable, HurstCurve


def fmt_number(x, precision="6") -> str:
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    if precision == "full":
        return repr(x)
    return format(x, f".{int(precision)}g")


def write_csv(path: Path, header: list[str], rows, precision="6") -> Path:
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([c if isinstance(c, str) else fmt_number(c, precision) for c in row])
    return path


def rv_rows(rv: RVSeries):
    return ([d.isoformat(), v] for d, v in zip(rv.dates, rv.rv))


def fluctuation_rows(table: FluctuationTable):
    for i, s in enumerate(table.s):
        for j, q in enumerate(table.q):
            yield [int(s), q, table.F[i, j]]


def hurst_rows(curve: HurstCurve):
    return ([q, h, se, r2] for q, h, se, r2 in zip(curve.q, curve.h, curve.stderr, curve.r2))


def sniff_header(path: Path) -> list[str]:
    try:
        with Path(path).open(newline="") as fh:
            first = fh.readline()
    except OSError as exc:
        raise DataError(f"cannot open {path}: {exc.strerror or exc}") from exc
    return [c.strip() for c in first.strip().split(",")]


def read_table(path: Path) -> tuple[list[str], np.ndarray]:
    """Header plus float matrix of a numeric CSV."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise DataError(f"cannot open {path}: {exc.strerror or exc}") from exc
    reader = csv.reader(io.StringIO(text))
    header = [c.strip() for c in next(reader, [])]
    try:
        rows = [[float(c) for c in row] for row in reader if row]
    except ValueError as exc:
        raise DataError(f"{path}: non-numeric value ({exc})") from exc
    if not rows:
        raise DataError(f"{path}: no records")
    return header, np.array(rows)


def read_series(path: Path) -> np.ndarray:
    """Values column of an ``index,value`` CSV."""
    header, data = read_table(path)
    if header[:2] != ["index", "value"]:
        raise DataError(f"{path}: expected header 'index,value'")
    return data[:, 1]


def read_hurst_curve(path: Path) -> HurstCurve:
    header, data = read_table(path)
    if header[:2] != ["q", "h"]:
        raise DataError(f"{path}: expected a Hurst curve with header starting 'q,h'")
    col = {name: i for i, name in enumerate(header)}
    n = data.shape[0]
    nan = np.full(n, np.nan)
    return HurstCurve(
        q=data[:, 0],
        h=data[:, 1],
        stderr=data[:, col["stderr"]] if "stderr" in col else nan,
        r2=data[:, col["r2"]] if "r2" in col else nan,
        estimator="file",
        fit_window=(np.nan, np.nan),
    )


def read_rv(path: Path) -> RVSeries:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise DataError(f"cannot open {path}: {exc.strerror or exc}") from exc
    return read_rv_csv(text)
