"""Command-line front end: ``roughvol {rv,mfdfa,sf,spectrum,shuffle,synth}``.

Exit codes: 0 success, 1 usage/validation, 2 data error, 3 numeric failure.
"""

from __future__ import annotations

import argparse
import datetime as dt
import gzip
import hashlib
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import __version__
from . import market_data, synth, tables
from .errors import DataError, RoughVolError, ValidationError
from .mfdfa import MfdfaConfig, default_q_grid, mfdfa_analyze
from .multifractal import format_uncertainty, shuffle_ensemble, singularity_spectrum
from .structure_function import default_delta_grid, default_sf_q_grid, sf_hurst
from .volseries import IncrementSeries, LogVolSeries, distribution_summary, increments, log_vol

logger = logging.getLogger("roughvol")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _range(text: str) -> tuple[float, float]:
    try:
        lo, hi = (float(v) for v in text.split(":"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected LO:HI, got {text!r}")
    if not lo < hi:
        raise argparse.ArgumentTypeError(f"empty range {text!r}")
    return lo, hi


def _int_list(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _positive(kind):
    def conv(text):
        v = kind(text)
        if v <= 0:
            raise argparse.ArgumentTypeError(f"must be positive, got {text}")
        return v

    return conv


def _precision(text: str) -> str:
    if text == "full":
        return text
    if text.isdigit() and int(text) > 0:
        return text
    raise argparse.ArgumentTypeError("precision is a positive integer or 'full'")


def _sha256(path: Path) -> str:
    h = hashlib.sha256()
    with Path(path).open("rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


class _Run:
    """Collects outputs and writes the manifest that accompanies them."""

    def __init__(self, args):
        self.args = args
        self.out = Path(args.output_dir)
        self.out.mkdir(parents=True, exist_ok=True)
        self.started = dt.datetime.now(dt.timezone.utc).isoformat()
        self.outputs: list[str] = []
        self.inputs: dict[str, str] = {}
        self.seeds: list[int] = []
        self.extra: dict = {}

    def input(self, path) -> Path:
        path = Path(path)
        if not path.is_file():
            raise DataError(f"cannot open {path}")
        self.inputs[str(path)] = _sha256(path)
        return path

    def csv(self, name, header, rows):
        tables.write_csv(self.out / name, header, rows, self.args.precision)
        self.outputs.append(name)

    def text(self, name, content):
        (self.out / name).write_text(content)
        self.outputs.append(name)

    def finish(self):
        config = {k: v for k, v in vars(self.args).items() if k != "func"}
        manifest = {
            "tool": "roughvol",
            "version": __version__,
            "command": self.args.command,
            "config": json.loads(json.dumps(config, default=str)),
            "inputs": self.inputs,
            "seeds": self.seeds,
            "outputs": self.outputs,
            "started_at": self.started,
            "finished_at": dt.datetime.now(dt.timezone.utc).isoformat(),
            **self.extra,
        }
        (self.out / f"manifest_{self.args.command}.json").write_text(
            json.dumps(manifest, indent=2, sort_keys=True) + "\n"
        )


def _load_increments(run: _Run, path, lag: int) -> IncrementSeries:
    path = run.input(path)
    header = tables.sniff_header(path)
    if header[:2] == ["date", "rv"]:
        lv = log_vol(tables.read_rv(path))
        run.extra["zero_rv_days_dropped"] = lv.n_zero_dropped
        return increments(lv, lag, label=path.name)
    if header[:2] == ["index", "value"]:
        if lag != 1:
            raise ValidationError("--delta applies only to RV input; increments are used as given")
        return IncrementSeries(tables.read_series(path), 1, path.name)
    raise DataError(f"{path}: expected an RV file (date,rv) or a series file (index,value)")


def _load_logvol(run: _Run, path) -> LogVolSeries:
    path = run.input(path)
    header = tables.sniff_header(path)
    if header[:2] == ["date", "rv"]:
        return log_vol(tables.read_rv(path))
    if header[:2] == ["index", "value"]:
        return LogVolSeries.from_values(tables.read_series(path))
    raise DataError(f"{path}: expected an RV file (date,rv) or a log-volatility series (index,value)")


def _mfdfa_config(args, n: int) -> MfdfaConfig:
    if args.s_grid:
        s_grid = np.array(args.s_grid, dtype=int)
    else:
        s_max = args.s_max if args.s_max else n // 4
        if s_max < args.s_min:
            raise ValidationError(f"series of length {n} too short for scales [{args.s_min}, {s_max}]")
        s_grid = np.unique(np.round(np.geomspace(args.s_min, s_max, args.s_count)).astype(int))
    return MfdfaConfig(
        q_grid=default_q_grid(args.q_min, args.q_max, args.q_step),
        s_grid=s_grid,
        fit_range=args.s_fit,
        poly_order=args.poly_order,
    )


def cmd_rv(args):
    run = _Run(args)
    path = run.input(args.ticks)
    opener = gzip.open if path.suffix == ".gz" else open
    try:
        with opener(path, "rb") as fh:
            ticks = market_data.parse_ticks(fh, label=path.name)
    except (OSError, EOFError) as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc
    run.extra["ticks"] = {
        "records": len(ticks),
        "malformed": ticks.n_malformed,
        "non_positive_price": ticks.n_rejected,
        "reordered": ticks.n_reordered,
    }
    grid = market_data.resample(ticks, args.delta_t, args.min_ticks)
    rv = market_data.daily_rv(market_data.intraday_returns(grid))
    run.extra["dropped_days"] = [d.isoformat() for d in grid.dropped_days]
    run.csv("rv.csv", ["date", "rv"], tables.rv_rows(rv))
    if args.signature:
        rows = market_data.signature_curve(ticks, args.signature, args.min_ticks)
        run.csv("signature.csv", ["delta_t_minutes", "mean_rv"], rows)
    run.finish()
    print(f"{len(rv.dates)} day(s) written to {run.out / 'rv.csv'}")


def cmd_mfdfa(args):
    run = _Run(args)
    inc = _load_increments(run, args.input, args.delta)
    cfg = _mfdfa_config(args, len(inc))
    table, curve = mfdfa_analyze(inc.values, cfg)
    run.csv("increments.csv", ["index", "value"], enumerate(inc.values))
    if len(inc) >= 4 and np.ptp(inc.values) > 0:
        dist = distribution_summary(inc, args.bins)
        run.csv(
            "distribution.csv",
            ["bin_center", "density", "gaussian_density"],
            zip(dist.bin_centers, dist.density, dist.gaussian_density),
        )
        run.extra["kurtosis"] = dist.kurtosis
    run.csv("fq.csv", ["s", "q", "F"], tables.fluctuation_rows(table))
    run.csv("hurst_mfdfa.csv", ["q", "h", "stderr", "r2"], tables.hurst_rows(curve))
    run.finish()
    if np.any(np.isclose(curve.q, 2.0)):
        print(f"h(2) = {curve.at(2.0):.4f}")


def cmd_sf(args):
    run = _Run(args)
    lv = _load_logvol(run, args.input)
    q_grid = default_sf_q_grid(args.q_max, args.q_step)
    delta_grid = default_delta_grid(len(lv), int(args.delta_fit[1]))
    zeta, curve, table = sf_hurst(lv, q_grid, delta_grid, args.delta_fit)
    rows = ([int(d), q, table.m[i, j]] for i, d in enumerate(table.delta) for j, q in enumerate(table.q))
    run.csv("sf.csv", ["delta", "q", "m"], rows)
    run.csv("hurst_sf.csv", ["q", "zeta", "h", "stderr"], zip(zeta.q, zeta.zeta, zeta.h, zeta.stderr))
    run.finish()
    if np.any(np.isclose(curve.q, 2.0)):
        print(f"h(2) = {curve.at(2.0):.4f}")


def cmd_spectrum(args):
    run = _Run(args)
    path = run.input(args.input)
    curve = tables.read_hurst_curve(path)
    spec = singularity_spectrum(curve)
    run.csv("spectrum.csv", ["q", "alpha", "f_alpha"], zip(spec.q, spec.alpha, spec.f_alpha))
    run.csv("spectrum_summary.csv", ["measure", "value"], [["delta_h", spec.delta_h], ["delta_alpha", spec.delta_alpha]])
    run.finish()
    print(f"delta_h = {spec.delta_h:.4f}  delta_alpha = {spec.delta_alpha:.4f}")


def cmd_shuffle(args):
    if args.replicates < 2:
        raise ValidationError("--replicates must be at least 2 to estimate a spread")
    run = _Run(args)
    inc = _load_increments(run, args.input, args.delta)
    cfg = _mfdfa_config(args, len(inc))
    res = shuffle_ensemble(inc, cfg, args.replicates, args.seed)
    run.seeds = res.seeds
    run.csv("shuffle.csv", ["q", "mean_h", "std_h"], zip(res.q, res.mean_h, res.std_h))
    run.csv(
        "shuffle_summary.csv",
        ["measure", "mean", "std"],
        [["delta_h", res.delta_h_mean, res.delta_h_std], ["delta_alpha", res.delta_alpha_mean, res.delta_alpha_std]],
    )
    lines = [f"{'q':>8}  h(q) shuffled, {res.n_replicates} replicates"]
    lines += [f"{q:8g}  {format_uncertainty(m, s)}" for q, m, s in zip(res.q, res.mean_h, res.std_h)]
    lines.append(f"{'dh':>8}  {format_uncertainty(res.delta_h_mean, res.delta_h_std)}")
    lines.append(f"{'dalpha':>8}  {format_uncertainty(res.delta_alpha_mean, res.delta_alpha_std)}")
    run.text("shuffle_table.txt", "\n".join(lines) + "\n")
    run.finish()
    print("\n".join(lines))


def cmd_synth(args):
    if args.kind == "fbm":
        if not 0.0 < args.hurst < 1.0:
            raise ValidationError(f"--hurst must lie in (0, 1), got {args.hurst}")
        values = synth.fbm_increments(args.hurst, args.n, args.seed)
        if args.path:
            values = np.cumsum(values)
    elif args.kind == "white":
        values = synth.gaussian_white(args.n, args.seed)
        if args.path:
            values = np.cumsum(values)
    else:
        values = synth.binomial_cascade(args.a, args.levels)
    run = _Run(args)
    run.seeds = [args.seed] if args.kind != "cascade" else []
    run.csv("synth.csv", ["index", "value"], enumerate(values))
    run.finish()
    print(f"{values.size} value(s) written to {run.out / 'synth.csv'}")


def _mfdfa_flags(p):
    p.add_argument("--q-min", type=float, default=-25.0)
    p.add_argument("--q-max", type=float, default=25.0)
    p.add_argument("--q-step", type=_positive(float), default=0.5)
    p.add_argument("--s-fit", type=_range, default=(80.0, 280.0), metavar="LO:HI")
    p.add_argument("--s-min", type=_positive(int), default=16)
    p.add_argument("--s-max", type=_positive(int), default=None, help="default: N/4")
    p.add_argument("--s-count", type=_positive(int), default=20)
    p.add_argument("--s-grid", type=_int_list, default=None, help="explicit comma-separated scales")
    p.add_argument("--poly-order", type=int, default=3)
    p.add_argument("--delta", type=_positive(int), default=1, help="increment lag in days (RV input)")


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--output-dir", default=".", help="directory for output files")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--precision", type=_precision, default="6", help="significant digits or 'full'")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = _Parser(prog="roughvol", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("rv", parents=[common], help="daily realized variance from tick CSV")
    p.add_argument("ticks")
    p.add_argument("--delta-t", type=_positive(int), default=5, help="sampling period in minutes")
    p.add_argument("--min-ticks", type=int, default=100)
    p.add_argument("--signature", type=_int_list, default=None, metavar="DT,DT,...")
    p.set_defaults(func=cmd_rv)

    p = sub.add_parser("mfdfa", parents=[common], help="MF-DFA of log-volatility increments")
    p.add_argument("input", help="rv.csv (date,rv) or increments (index,value)")
    _mfdfa_flags(p)
    p.add_argument("--bins", type=_positive(int), default=50)
    p.set_defaults(func=cmd_mfdfa)

    p = sub.add_parser("sf", parents=[common], help="structure-function estimate of h(q)")
    p.add_argument("input", help="rv.csv (date,rv) or log-volatility (index,value)")
    p.add_argument("--q-max", type=_positive(float), default=8.0)
    p.add_argument("--q-step", type=_positive(float), default=0.2)
    p.add_argument("--delta-fit", type=_range, default=(1.0, 40.0), metavar="LO:HI")
    p.set_defaults(func=cmd_sf)

    p = sub.add_parser("spectrum", parents=[common], help="singularity spectrum from a Hurst curve")
    p.add_argument("input", help="Hurst curve CSV (q,h,...)")
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("shuffle", parents=[common], help="MF-DFA over shuffled surrogates")
    p.add_argument("input", help="rv.csv (date,rv) or increments (index,value)")
    _mfdfa_flags(p)
    p.add_argument("--replicates", type=int, default=20)
    p.set_defaults(func=cmd_shuffle)

    p = sub.add_parser("synth", parents=[common], help="generate oracle series")
    p.add_argument("kind", choices=["fbm", "white", "cascade"])
    p.add_argument("--hurst", type=float, default=0.5)
    p.add_argument("--n", type=_positive(int), default=1 << 16)
    p.add_argument("--path", action="store_true", help="emit the cumulative path instead of increments")
    p.add_argument("--a", type=float, default=0.6, help="cascade multiplier")
    p.add_argument("--levels", type=int, default=16)
    p.set_defaults(func=cmd_synth)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # usage errors, --help, --version
        return exc.code
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        args.func(args)
    except RoughVolError as exc:
        print(f"roughvol {args.command}: error: {exc}", file=sys.stderr)
        return exc.exit_code
    except FileNotFoundError as exc:
        print(f"roughvol {args.command}: error: cannot open {exc.filename}", file=sys.stderr)
        return DataError.exit_code
    return 0


if __name__ == "__main__":
    sys.exit(main())
