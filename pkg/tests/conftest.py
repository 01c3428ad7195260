import calendar
import datetime as dt

import pytest

from roughvol.market_data import parse_ticks


def utc(day: str, hhmm: str = "00:00", seconds: int = 0) -> int:
    d = dt.datetime.fromisoformat(f"{day}T{hhmm}").replace(tzinfo=dt.timezone.utc)
    return calendar.timegm(d.utctimetuple()) + seconds


def tick_csv(rows) -> bytes:
    return "".join(f"{int(t)},{float(p)!r},{float(v)!r}\n" for t, p, v in rows).encode()


@pytest.fixture
def make_ticks():
    def _make(rows, **kw):
        return parse_ticks(tick_csv(rows), **kw)

    return _make


ACCEPTANCE_RESULTS: list[tuple[str, str, str]] = []


def record_criterion(name: str, ok: bool | None, detail: str) -> None:
    status = "SKIP" if ok is None else ("PASS" if ok else "FAIL")
    ACCEPTANCE_RESULTS.append((name, status, detail))


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for name, status, detail in ACCEPTANCE_RESULTS:
        terminalreporter.write_line(f"[{status}] {name}: {detail}")
