"""Command-line pipeline: analyze, synth, plot, validate.

``analyze`` runs the full chain (ingest, optional detrending and
overnight exclusion, event selection per threshold, relaxation curves,
power-law fits with bootstrap errors and KS checks) and emits curve
TSVs, fit reports, and a summary table.  ``synth`` renders a generator
spec to CSV, ``plot`` turns curve TSVs into SVG, and ``validate`` lints
inputs without computing anything.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import re
import sys
import tempfile
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, replace

import numpy as np

from . import _svg
from .detrend import estimate_pattern, normalize
from .events import (FILTERS, EventCalendar, filter_events, read_calendar,
                     select_events, tag_origins)
from .fitting import (FitConfig, FitError, PowerLawFit, bootstrap_error,
                      fit_cumulative, ks_test, tail_slope)
from .relaxation import DIRECTIONS, cumulate, omori_count, remanent
from .series import (DataError, apply_overnight_policy, compute_returns,
                     ingest_prices)
from .synth import GeneratorSpec, generate

__all__ = ["AnalysisConfig", "run_analyze", "run_synth", "run_plot", "main"]

log = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_FIT = 3

DEFAULT_ZETAS = (2.0, 4.0, 6.0, 8.0)


class ConfigError(ValueError):
    """Invalid configuration (usage-level error)."""


@dataclass
class AnalysisConfig:
    """Everything run_analyze needs; mirrors the analyze flags."""

    input: str
    bar_interval: int = 0
    detrend: bool = False
    exclude_overnight: bool = False
    zetas: tuple = DEFAULT_ZETAS
    t_max: int | None = None
    calendar: str | None = None
    filters: tuple = ("all",)
    fit_window: tuple | None = None
    tail_window: tuple | None = None
    bootstrap: int = 200
    seed: int = 0
    out: str = "out"
    workers: int = 1
    emit_pattern: bool = False

    def __post_init__(self):
        if not self.input:
            raise ConfigError("input path is required")
        z = tuple(float(x) for x in self.zetas)
        if not z or any(x <= 0 for x in z) or list(z) != sorted(z):
            raise ConfigError("zetas must be positive and ascending")
        self.zetas = z
        bad = [f for f in self.filters if f not in FILTERS]
        if bad:
            raise ConfigError(f"unknown filter(s) {bad}; expected {FILTERS}")
        if self.bootstrap < 0:
            raise ConfigError("bootstrap count must be >= 0")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")


def _fmt(x) -> str:
    """Full-precision float text, identical wherever a value appears."""
    return repr(float(x))


def _fmt_zeta(z: float) -> str:
    return str(int(z)) if float(z).is_integer() else repr(float(z))


def _atomic_write(path: str, text: str):
    d = os.path.dirname(path) or "."
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_curve_tsv(path: str, curve):
    lines = ["lag\tvalue\tn_events\tstddev"]
    for lag, val, n, sd in zip(curve.lags, curve.values, curve.contributing,
                               curve.event_dispersion):
        lines.append(f"{int(lag)}\t{_fmt(val)}\t{int(n)}\t{_fmt(sd)}")
    _atomic_write(path, "\n".join(lines) + "\n")


CURVE_NAME = re.compile(
    r"^(remanent_v|cumulative_V|omori_N)_(pre|post)_([0-9.]+)x_(.+)\.tsv$"
)


def read_curve_tsv(path: str):
    """Parse a curve TSV back into arrays plus filename metadata."""
    name = os.path.basename(path)
    m = CURVE_NAME.match(name)
    if not m:
        raise DataError(f"{name}: not a curve TSV name "
                        "({kind}_{dir}_{zeta}x_{filter}.tsv)")
    kind, direction, zeta, filt = m.group(1), m.group(2), float(m.group(3)), m.group(4)
    lags, values, counts, sds = [], [], [], []
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("lag"):
                continue
            parts = line.split("\t")
            if len(parts) != 4:
                raise DataError(f"{name} line {lineno}: expected 4 columns")
            lags.append(int(parts[0]))
            values.append(float(parts[1]))
            counts.append(int(parts[2]))
            sds.append(float(parts[3]))
    return {
        "kind": kind, "direction": direction, "zeta": zeta, "filter": filt,
        "lags": np.array(lags), "values": np.array(values),
        "contributing": np.array(counts), "stddev": np.array(sds),
    }


def _parse_window(text: str) -> tuple:
    try:
        lo, hi = text.split(":")
        return (int(lo), int(hi))
    except ValueError:
        raise ConfigError(f"bad window {text!r}; expected lo:hi") from None


def load_config_file(path: str) -> dict:
    """Flat key=value config; '#' comments; flags override these keys."""
    out = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ConfigError(f"{path} line {lineno}: expected key=value")
            key, _, value = line.partition("=")
            out[key.strip().replace("-", "_")] = value.strip()
    return out


_BOOL_KEYS = ("detrend", "exclude_overnight", "emit_pattern")
_INT_KEYS = ("bar_interval", "t_max", "bootstrap", "seed", "workers")


def _config_from_sources(args: argparse.Namespace) -> AnalysisConfig:
    file_vals = load_config_file(args.config) if args.config else {}
    merged: dict = {}
    for key, raw in file_vals.items():
        if key in ("tmax",):
            key = "t_max"
        if key in _BOOL_KEYS:
            merged[key] = raw.lower() in ("1", "true", "yes", "on")
        elif key in _INT_KEYS:
            merged[key] = int(raw)
        elif key == "zeta":
            merged["zetas"] = tuple(float(x) for x in raw.split(","))
        elif key == "filter":
            merged["filters"] = tuple(x.strip() for x in raw.split(","))
        elif key in ("fit_window", "tail_window"):
            merged[key] = _parse_window(raw)
        elif key in ("input", "calendar", "out"):
            merged[key] = raw
        else:
            raise ConfigError(f"unknown config key {key!r}")
    flag_map = dict(
        input=args.input, bar_interval=args.bar_interval, detrend=args.detrend,
        exclude_overnight=args.exclude_overnight, t_max=args.tmax,
        calendar=args.calendar, bootstrap=args.bootstrap, seed=args.seed,
        out=args.out, workers=args.workers, emit_pattern=args.emit_pattern,
    )
    if args.zeta is not None:
        flag_map["zetas"] = tuple(float(x) for x in args.zeta.split(","))
    if args.filter is not None:
        flag_map["filters"] = tuple(x.strip() for x in args.filter.split(","))
    if args.fit_window is not None:
        flag_map["fit_window"] = _parse_window(args.fit_window)
    if args.tail_window is not None:
        flag_map["tail_window"] = _parse_window(args.tail_window)
    for key, val in flag_map.items():
        if val is not None:
            merged[key] = val
    if "input" not in merged:
        raise ConfigError("input path is required (flag --input or config key)")
    return AnalysisConfig(**merged)


def _default_tail_window(t_hi: int) -> tuple:
    # Upper half-decade of available lags.
    lo = max(1, int(np.ceil(t_hi / np.sqrt(10.0))))
    return (lo, t_hi)


def _fit_report(fit: PowerLawFit, ks=None) -> dict:
    rep = {
        "method": fit.method,
        "space": fit.space,
        "p": fit.p,
        "p_err": fit.p_err,
        "tau": fit.tau,
        "A": fit.A,
        "window": list(fit.window),
        "residual_rms": fit.residual_rms,
        "bound_hit": list(fit.bound_hit),
    }
    if ks is not None:
        rep["ks_D"], rep["ks_p_value"] = ks
    return rep


def _analyze_task(vol, sub, zeta: float, filt: str, direction: str,
                  config: AnalysisConfig, t_max: int, seed: int) -> dict:
    """Curves and fits for one (zeta, filter, direction) cell."""
    rem = remanent(vol, sub, direction, t_max)
    cum = cumulate(rem)
    omo = omori_count(vol, sub, zeta, direction, t_max)

    lo, hi = config.fit_window or ((5, t_max) if config.bar_interval > 0
                                   else (1, t_max))
    hi = min(hi, cum.t_max)
    fit = fit_cumulative(cum, (lo, hi))
    ks = None
    if config.bootstrap > 0:
        p_err = bootstrap_error(
            vol, sub, direction,
            FitConfig(t_max=t_max, window=(lo, hi)),
            config.bootstrap, seed=seed,
        )
        fit = replace(fit, p_err=p_err)
        ks = ks_test(cum, fit, config.bootstrap, seed=seed + 1,
                     vol=vol, events=sub)

    tail = None
    tail_note = ""
    try:
        tail = tail_slope(cum, config.tail_window or _default_tail_window(hi))
    except FitError as exc:
        tail_note = str(exc)

    return {
        "zeta": zeta, "filter": filt, "direction": direction,
        "curves": {"remanent_v": rem, "cumulative_V": cum, "omori_N": omo},
        "fit": fit, "ks": ks, "tail": tail, "tail_note": tail_note,
        "n_events": len(sub),
    }


SUMMARY_COLS = ("zeta", "filter", "direction", "method", "n_events", "p",
                "p_err", "tau", "A", "residual_rms", "ks_D", "ks_p_value")


def _summary_line(res: dict, fit: PowerLawFit, ks) -> str:
    vals = [
        _fmt_zeta(res["zeta"]), res["filter"], res["direction"], fit.method,
        str(res["n_events"]), _fmt(fit.p),
        _fmt(fit.p_err) if fit.p_err is not None else "-",
        _fmt(fit.tau), _fmt(fit.A), _fmt(fit.residual_rms),
        _fmt(ks[0]) if ks else "-", _fmt(ks[1]) if ks else "-",
    ]
    return "\t".join(vals)


def run_analyze(config: AnalysisConfig) -> int:
    """Run the full pipeline and write artifacts under config.out."""
    prices = ingest_prices(config.input, config.bar_interval)
    vol = compute_returns(prices)
    if config.exclude_overnight:
        vol = apply_overnight_policy(vol, True)

    os.makedirs(config.out, exist_ok=True)
    if config.detrend:
        if config.bar_interval == 0:
            raise DataError("detrending applies to minute data only")
        pattern = estimate_pattern(vol)
        vol = normalize(vol, pattern)
        if config.emit_pattern:
            lines = ["slot\tD"]
            lines += [f"{s}\t{_fmt(d)}" for s, d in enumerate(pattern.pattern)]
            _atomic_write(os.path.join(config.out, "pattern.tsv"),
                          "\n".join(lines) + "\n")

    calendar = read_calendar(config.calendar) if config.calendar else None
    if calendar is not None and config.bar_interval > 0:
        warnings.warn("calendar ignored: origin tagging is daily-only")
    needs_origin = any(f in ("endogenous", "exogenous") for f in config.filters)
    if needs_origin and calendar is None:
        raise DataError("origin filters need --calendar")
    if needs_origin and config.bar_interval > 0:
        raise DataError("origin tagging is supported for daily data only")

    t_max = config.t_max or (1000 if config.bar_interval > 0 else 100)
    t_max = min(t_max, len(vol) - 1)

    tasks = []
    skipped = []
    for zi, zeta in enumerate(config.zetas):
        ev = select_events(vol, zeta)
        if calendar is not None and config.bar_interval == 0:
            ev = tag_origins(ev, calendar, prices)
        ev_lines = ["index\tdate\tsign\torigin\tvolatility"]
        dates = prices.obs_dates()[ev.indices + 1] if len(ev) else []
        for k in range(len(ev)):
            ev_lines.append(
                f"{int(ev.indices[k])}\t{dates[k]}\t{ev.sign_tags[k]}"
                f"\t{ev.origin_tags[k]}\t{_fmt(vol.values[ev.indices[k]])}"
            )
        _atomic_write(os.path.join(config.out, f"events_{_fmt_zeta(zeta)}x.tsv"),
                      "\n".join(ev_lines) + "\n")
        for fi, filt in enumerate(config.filters):
            sub = filter_events(ev, filt)
            if len(sub) == 0:
                skipped.append((zeta, filt, "no events"))
                continue
            for di, direction in enumerate(DIRECTIONS):
                seed = int(np.random.SeedSequence(
                    (config.seed, zi, fi, di)).generate_state(1)[0])
                tasks.append((vol, sub, zeta, filt, direction, config, t_max, seed))

    for zeta, filt, why in skipped:
        log.warning("skipping zeta=%s filter=%s: %s", _fmt_zeta(zeta), filt, why)

    if config.workers > 1:
        with ThreadPoolExecutor(max_workers=config.workers) as pool:
            results = list(pool.map(lambda t: _analyze_task(*t), tasks))
    else:
        results = [_analyze_task(*t) for t in tasks]

    summary = ["\t".join(SUMMARY_COLS)]
    for res in results:
        z, filt, direction = res["zeta"], res["filter"], res["direction"]
        stem = f"{direction}_{_fmt_zeta(z)}x_{filt}"
        for kind, curve in res["curves"].items():
            write_curve_tsv(os.path.join(config.out, f"{kind}_{stem}.tsv"), curve)
        report = {
            "direction": direction, "zeta": z, "filter": filt,
            "n_events": res["n_events"],
            "fits": [_fit_report(res["fit"], res["ks"])],
        }
        if res["tail"] is not None:
            report["fits"].append(_fit_report(res["tail"]))
        elif res["tail_note"]:
            report["tail_slope_skipped"] = res["tail_note"]
        _atomic_write(os.path.join(config.out, f"fit_{stem}.json"),
                      json.dumps(report, indent=2, sort_keys=True) + "\n")
        summary.append(_summary_line(res, res["fit"], res["ks"]))
        if res["tail"] is not None:
            summary.append(_summary_line(res, res["tail"], None))
    _atomic_write(os.path.join(config.out, "summary.tsv"),
                  "\n".join(summary) + "\n")
    log.info("analyze: %d curve cells, %d skipped, output in %s",
             len(results), len(skipped), config.out)
    return EXIT_OK


def run_synth(spec_path: str, out_csv: str) -> int:
    """Render a generator spec (JSON) to a price CSV plus sidecar."""
    with open(spec_path) as fh:
        raw = json.load(fh)
    if not isinstance(raw, dict):
        raise DataError(f"{spec_path}: spec must be a JSON object")
    if "shocks" in raw:
        raw["shocks"] = tuple((int(t), float(m)) for t, m in raw["shocks"])
    try:
        spec = GeneratorSpec(**raw)
    except TypeError as exc:
        raise DataError(f"{spec_path}: {exc}") from None
    prices = generate(spec)

    stamps = np.datetime_as_string(prices.timestamps, unit="s")
    lines = ["timestamp,price"]
    lines += [f"{ts},{_fmt(px)}" for ts, px in zip(stamps, prices.prices)]
    _atomic_write(out_csv, "\n".join(lines) + "\n")

    sidecar = asdict(spec)
    sidecar["shocks"] = [list(sh) for sh in spec.shocks]
    _atomic_write(out_csv + ".spec.json",
                  json.dumps(sidecar, indent=2, sort_keys=True) + "\n")
    return EXIT_OK


def _load_fit_overlay(tsv_path: str, meta: dict):
    """Model overlay points from the matching fit report, if present."""
    stem = f"{meta['direction']}_{_fmt_zeta(meta['zeta'])}x_{meta['filter']}"
    fit_path = os.path.join(os.path.dirname(tsv_path) or ".", f"fit_{stem}.json")
    if meta["kind"] != "cumulative_V" or not os.path.exists(fit_path):
        return None
    with open(fit_path) as fh:
        report = json.load(fh)
    for rep in report.get("fits", ()):
        if rep.get("method") == "full_model":
            lo, hi = rep["window"]
            fit = PowerLawFit(
                p=rep["p"], tau=rep["tau"], A=rep["A"],
                a_int=(rep["A"] if abs(1 - rep["p"]) < 1e-12
                       else rep["A"] * (1 - rep["p"])),
                window=(lo, hi), residual_rms=rep["residual_rms"],
                space=rep.get("space", "log"),
            )
            ts = np.unique(np.round(np.geomspace(lo, hi, 60)).astype(int))
            return ts, fit.predict(ts)
    return None


def run_plot(tsv_paths: list, out_dir: str) -> int:
    """Group curve TSVs by (kind, direction, filter) and render SVGs.

    Each group gets one log-log SVG with a polyline per threshold,
    error bars for the largest threshold carrying dispersion data, and
    a dashed model overlay where a fit report sits next to the TSV.
    """
    os.makedirs(out_dir, exist_ok=True)
    groups: dict = {}
    for path in tsv_paths:
        meta = read_curve_tsv(path)
        if meta["lags"].size == 0:
            raise DataError(f"{os.path.basename(path)}: empty curve")
        groups.setdefault(
            (meta["kind"], meta["direction"], meta["filter"]), []
        ).append((path, meta))

    for (kind, direction, filt), members in sorted(groups.items()):
        members.sort(key=lambda pm: pm[1]["zeta"])
        plot = _svg.LogLogPlot(
            title=f"{kind} {direction} [{filt}]", xlabel="t (bars)", ylabel=kind,
        )
        zmax = max(meta["zeta"] for _p, meta in members)
        for path, meta in members:
            pos = meta["values"] > 0
            dropped = int(np.count_nonzero(~pos & (meta["lags"] > 0)))
            if dropped:
                warnings.warn(
                    f"{os.path.basename(path)}: dropped {dropped} non-positive "
                    "points from the log plot"
                )
            err = meta["stddev"] if meta["zeta"] == zmax else None
            plot.add_curve(
                meta["lags"][pos], meta["values"][pos],
                label=f"zeta={_fmt_zeta(meta['zeta'])}",
                err=err[pos] if err is not None else None,
            )
            overlay = _load_fit_overlay(path, meta)
            if overlay is not None:
                plot.add_overlay(*overlay, label=f"zeta={_fmt_zeta(meta['zeta'])}")
        svg = plot.render()
        out = os.path.join(out_dir, f"plot_{kind}_{direction}_{filt}.svg")
        _atomic_write(out, svg + "\n")
    return EXIT_OK


def run_validate(input_path: str, bar_interval: int, calendar_path=None) -> int:
    """Lint inputs: parse everything, print counts, compute nothing."""
    prices = ingest_prices(input_path, bar_interval)
    vol = compute_returns(prices)
    print(f"observations: {len(prices)}")
    print(f"trading days: {prices.n_days}")
    print(f"bars: {len(vol)}")
    print(f"overnight bars: {int(vol.overnight_mask.sum())}")
    print(f"sigma: {_fmt(vol.sigma)}")
    print(f"max |R|/sigma: {_fmt(vol.values.max() / vol.sigma if vol.sigma else 0)}")
    if calendar_path:
        calendar = read_calendar(calendar_path)
        trading = set(np.unique(prices.obs_dates()).astype("datetime64[D]").tolist())
        hit = sum(1 for d in calendar.dates() if d in trading)
        print(f"calendar entries: {len(calendar)} ({hit} on trading days)")
    return EXIT_OK


class _Parser(argparse.ArgumentParser):
    # Usage problems exit 1; argparse's default of 2 is reserved for
    # data errors here.
    def error(self, message):
        self.print_usage(sys.stderr)
        raise SystemExit(EXIT_USAGE)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="remvol",
                     description="Event-conditioned volatility relaxation analysis")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    pa = sub.add_parser("analyze", help="run the full pipeline on a price CSV")
    pa.add_argument("--config", help="key=value config file; flags override")
    pa.add_argument("--input", help="price CSV (timestamp,price)")
    pa.add_argument("--bar-interval", type=int, default=None,
                    help="bar length in minutes; 0 = daily (default)")
    pa.add_argument("--detrend", action="store_true", default=None,
                    help="remove the intraday volatility pattern")
    pa.add_argument("--exclude-overnight", action="store_true", default=None,
                    help="exclude bars spanning a day boundary")
    pa.add_argument("--zeta", default=None,
                    help="comma list of thresholds (default 2,4,6,8)")
    pa.add_argument("--tmax", type=int, default=None,
                    help="maximum lag in bars (default 1000 minute, 100 daily)")
    pa.add_argument("--calendar", default=None,
                    help="exogenous-dates CSV (date,origin,note)")
    pa.add_argument("--filter", default=None,
                    help="comma list of event filters "
                         "(all, crash, rally, endogenous, exogenous)")
    pa.add_argument("--fit-window", default=None, metavar="LO:HI",
                    help="full-model fit window in bars")
    pa.add_argument("--tail-window", default=None, metavar="LO:HI",
                    help="tail-slope window in bars (default upper half-decade)")
    pa.add_argument("--bootstrap", type=int, default=None, metavar="B",
                    help="bootstrap/KS replicates (0 disables; default 200)")
    pa.add_argument("--seed", type=int, default=None,
                    help="seed for bootstrap and KS randomness")
    pa.add_argument("--out", default=None, help="output directory")
    pa.add_argument("--workers", type=int, default=None,
                    help="parallel workers over the analysis grid")
    pa.add_argument("--emit-pattern", action="store_true", default=None,
                    help="write the intraday pattern TSV (with --detrend)")

    ps = sub.add_parser("synth", help="render a generator spec to CSV")
    ps.add_argument("--spec", required=True, help="generator spec JSON")
    ps.add_argument("--out", required=True, help="output CSV path")

    pp = sub.add_parser("plot", help="render curve TSVs to SVG")
    pp.add_argument("curves", nargs="+", help="curve TSV files")
    pp.add_argument("--out", default="plots", help="output directory")

    pv = sub.add_parser("validate", help="lint inputs without analyzing")
    pv.add_argument("--input", required=True, help="price CSV")
    pv.add_argument("--bar-interval", type=int, default=0)
    pv.add_argument("--calendar", default=None)
    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(message)s")
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        if args.command == "analyze":
            config = _config_from_sources(args)
            return run_analyze(config)
        if args.command == "synth":
            return run_synth(args.spec, args.out)
        if args.command == "plot":
            return run_plot(args.curves, args.out)
        if args.command == "validate":
            return run_validate(args.input, args.bar_interval, args.calendar)
    except ConfigError as exc:
        print(f"remvol: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except FitError as exc:
        print(f"remvol: fit failure: {exc}", file=sys.stderr)
        return EXIT_FIT
    except (DataError, OSError, json.JSONDecodeError) as exc:
        print(f"remvol: {exc}", file=sys.stderr)
        return EXIT_DATA
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
