"""Command-line entry point: simulate, decompose, backtest, evaluate."""
from __future__ import annotations

import argparse
import csv
import json
import logging
import os
from pathlib import Path
import sys

from . import __version__
from .errors import ElspotError
from .filtering import DecomposeConfig, decompose
from .forecast import (VARIANTS, BacktestConfig, branching_histogram, calibration_history,
                       rolling_backtest)
from .fou import FouParams
from .gev import GevParams
from .hawkes import HawkesParams, Jump2Params
from .metrics import report_from_records
from .series import DEFAULT_CALENDAR, HolidayCalendar, load_csv, write_csv
from .simulate import REFERENCE_FOU, REFERENCE_JUMP, simulate_model, synthetic_price_series

log = logging.getLogger("elspot")

EXIT_USAGE = 2
EXIT_DATA = 3


class UsageError(Exception):
    """Invalid parameters; reported with exit code 2."""


def parse_horizons(text):
    """'1-30', '1,7,30' or a mix such as '1-5,10'."""
    out = set()
    for part in str(text).split(","):
        part = part.strip()
        if not part:
            continue
        if "-" in part:
            a, b = part.split("-", 1)
            out.update(range(int(a), int(b) + 1))
        else:
            out.add(int(part))
    if not out:
        raise UsageError(f"no horizons in {text!r}")
    return tuple(sorted(out))


def parse_variants(text):
    vs = tuple(v.strip() for v in str(text).split(",") if v.strip())
    bad = [v for v in vs if v not in VARIANTS]
    if bad or not vs:
        raise UsageError(f"unknown variant(s) {bad}; choose from {VARIANTS}")
    return vs


def read_config(path):
    """Flat ``key = value`` file; '#' starts a comment. Keys use flag names."""
    cfg = {}
    with open(path, encoding="utf-8") as fh:
        for n, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError(f"{path}:{n}: expected key=value")
            k, v = (s.strip() for s in line.split("=", 1))
            cfg[k.lstrip("-").replace("-", "_")] = v
    return cfg


def _bool(v):
    if isinstance(v, bool):
        return v
    return str(v).strip().lower() in ("1", "true", "yes", "on")


def _add_common(p):
    p.add_argument("--config", help="flat key=value file; command-line flags take precedence")
    p.add_argument("--output-dir", default=".", help="directory for output files")
    p.add_argument("--seed", type=int, default=0, help="root random seed")
    p.add_argument("--log-level", default="WARNING")


def _add_input(p):
    p.add_argument("--input", help="CSV with header date,price")
    p.add_argument("--holidays", help="extra holiday dates, one ISO date per line")
    p.add_argument("--no-builtin-holidays", action="store_true")


def _add_decompose(p):
    d = DecomposeConfig()
    p.add_argument("--level", type=int, default=d.level, help="wavelet approximation level")
    p.add_argument("--theta", type=float, default=d.theta, help="median-reversion factor")
    p.add_argument("--threshold", type=float, default=d.threshold, help="spike threshold in sigma units")
    p.add_argument("--ma-window", type=int, default=d.ma_window)
    p.add_argument("--iterate-spikes", action="store_true")


def build_parser():
    parser = argparse.ArgumentParser(prog="elspot", description=__doc__)
    parser.add_argument("--version", action="version", version=f"elspot {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", help="simulate paths of X = X1 + X2")
    _add_common(s)
    f, j = REFERENCE_FOU, REFERENCE_JUMP
    s.add_argument("--h", "--hurst", dest="hurst", type=float, default=f.hurst)
    s.add_argument("--alpha1", type=float, default=f.alpha1)
    s.add_argument("--sigma", type=float, default=f.sigma)
    s.add_argument("--alpha2", type=float, default=j.alpha2)
    s.add_argument("--lambda", dest="lambda0", type=float, default=j.hawkes.lambda0)
    s.add_argument("--gamma", type=float, default=j.hawkes.gamma)
    s.add_argument("--beta", type=float, default=j.hawkes.beta)
    s.add_argument("--mu", type=float, default=j.mark_dist.mu, help="GEV location")
    s.add_argument("--mark-sigma", type=float, default=j.mark_dist.sigma, help="GEV scale")
    s.add_argument("--xi", type=float, default=j.mark_dist.xi, help="GEV shape")
    s.add_argument("--days", type=int, default=730)
    s.add_argument("--paths", type=int, default=1, help="number of independent paths")
    s.add_argument("--prices", action="store_true",
                   help="also write a synthetic date,price series with weekly and trend parts")

    d = sub.add_parser("decompose", help="split a price series into its components")
    _add_common(d)
    _add_input(d)
    _add_decompose(d)

    b = sub.add_parser("backtest", help="rolling-window interval forecasts and scores")
    _add_common(b)
    _add_input(b)
    _add_decompose(b)
    b.add_argument("--variant", default="fbm,sbm,naive", help="comma list of fbm, sbm, naive")
    b.add_argument("--horizons", default="1-30", help="e.g. 1-30 or 1,7,30")
    b.add_argument("--paths", type=int, default=1000, help="Monte-Carlo paths per forecast")
    b.add_argument("--window", type=int, default=730, help="calibration window in days")
    b.add_argument("--pin-hurst", type=float, default=None, help="fix H instead of estimating it")
    b.add_argument("--threads", type=int, default=1, help="worker processes")

    e = sub.add_parser("evaluate", help="score forecasts written by backtest")
    _add_common(e)
    e.add_argument("--input", nargs="+", help="forecast JSON files")
    return parser


def parse_args(argv):
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "config", None):
        cfg = read_config(args.config)
        sub = parser._subparsers._group_actions[0].choices[args.command]
        known = {a.dest: a for a in sub._actions}
        unknown = [k for k in cfg if k not in known]
        if unknown:
            raise UsageError(f"unknown config keys: {unknown}")
        defaults = {}
        for k, v in cfg.items():
            a = known[k]
            if a.nargs == 0:
                defaults[k] = _bool(v)
            elif a.nargs == "+":
                defaults[k] = v.split()
            else:
                defaults[k] = a.type(v) if a.type else v
        sub.set_defaults(**defaults)
        args = parser.parse_args(argv)
    return args


def _calendar(args):
    if getattr(args, "holidays", None):
        return HolidayCalendar.from_file(args.holidays, include_builtin=not args.no_builtin_holidays)
    if getattr(args, "no_builtin_holidays", False):
        return HolidayCalendar(frozenset(), easter_monday=False)
    return DEFAULT_CALENDAR


def _decompose_config(args):
    return DecomposeConfig(level=args.level, theta=args.theta, threshold=args.threshold,
                           ma_window=args.ma_window, iterate_spikes=args.iterate_spikes)


def _load(args):
    if not args.input:
        raise UsageError("--input is required")
    return load_csv(args.input, _calendar(args))


def _outdir(args):
    out = Path(args.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_simulate(args):
    try:
        fou = FouParams(args.alpha1, args.sigma, args.hurst)
        hp = HawkesParams(args.lambda0, args.gamma, args.beta)
        jump = Jump2Params(args.alpha2, hp, GevParams(args.mu, args.mark_sigma, args.xi))
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    if not hp.stationary:
        raise UsageError(f"NonStationary: gamma={hp.gamma} must be < beta={hp.beta}")
    if args.days < 1 or args.paths < 1:
        raise UsageError("--days and --paths must be >= 1")
    out = _outdir(args)
    written = []
    for k in range(args.paths):
        suffix = "" if args.paths == 1 else f"_{k:04d}"
        seed = args.seed if args.paths == 1 else [args.seed, k]
        if args.prices:
            syn = synthetic_price_series(fou, jump, args.days, seed)
            path = syn.path
            write_csv(syn.series, out / f"prices{suffix}.csv")
            written.append(out / f"prices{suffix}.csv")
        else:
            path = simulate_model(fou, jump, args.days, seed)
        path.to_csv(out / f"simulation{suffix}.csv")
        path.events.to_csv(out / f"events{suffix}.csv")
        written += [out / f"simulation{suffix}.csv", out / f"events{suffix}.csv"]
    return written


def cmd_decompose(args):
    series = _load(args)
    dec = decompose(series, _decompose_config(args))
    out = _outdir(args)
    dec.to_csv(out / "decomposition.csv")
    dec.jump_events.to_csv(out / "jumps.csv")
    with open(out / "decomposition.json", "w", encoding="utf-8") as fh:
        json.dump({**dec.summary(), "start_date": str(series.start_date), "length": len(series)},
                  fh, indent=2)
    return [out / "decomposition.csv", out / "jumps.csv", out / "decomposition.json"]


def _write_records(path, records):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump([r.to_json() for r in records], fh)


def cmd_backtest(args):
    variants = parse_variants(args.variant)
    horizons = parse_horizons(args.horizons)
    try:
        base = BacktestConfig(window_length=args.window, horizons=horizons, n_paths=args.paths,
                              seed=args.seed, pin_hurst=args.pin_hurst,
                              decompose=_decompose_config(args), threads=max(1, args.threads))
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    series = _load(args)
    out = _outdir(args)
    written, results = [], {}
    for v in variants:
        cfg = BacktestConfig(**{**base.__dict__, "variant": v})
        records = rolling_backtest(series, cfg)
        results[v] = records
        _write_records(out / f"forecasts_{v}.json", records)
        written.append(out / f"forecasts_{v}.json")
        rows = calibration_history(records)
        if rows:
            with open(out / f"calibration_{v}.csv", "w", newline="", encoding="utf-8") as fh:
                w = csv.DictWriter(fh, fieldnames=list(rows[0]))
                w.writeheader()
                w.writerows(rows)
            counts, edges = branching_histogram(rows)
            with open(out / f"branching_{v}.csv", "w", newline="", encoding="utf-8") as fh:
                w = csv.writer(fh)
                w.writerow(["ratio_lo", "ratio_hi", "count"])
                w.writerows(zip(edges[:-1], edges[1:], counts))
            written += [out / f"calibration_{v}.csv", out / f"branching_{v}.csv"]
    written += _write_report(report_from_records(results), out)
    return written


def _write_report(report, out):
    report.to_json(out / "report.json")
    report.to_csv(out / "report.csv")
    report.horizon_csv(out / "report_horizons.csv")
    return [out / "report.json", out / "report.csv", out / "report_horizons.csv"]


def cmd_evaluate(args):
    if not args.input:
        raise UsageError("--input is required")
    by_variant = {}
    for path in args.input:
        with open(path, encoding="utf-8") as fh:
            recs = json.load(fh)
        if not isinstance(recs, list):
            raise UsageError(f"{path}: expected a list of forecast records")
        for r in recs:
            by_variant.setdefault(r["variant"], []).append(r)
    return _write_report(report_from_records(by_variant), _outdir(args))


COMMANDS = {"simulate": cmd_simulate, "decompose": cmd_decompose,
            "backtest": cmd_backtest, "evaluate": cmd_evaluate}


def main(argv=None):
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        args = parse_args(argv)
    except UsageError as exc:
        print(f"elspot: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # argparse: --help/--version exit 0, bad flags exit 2
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    logging.basicConfig(level=getattr(logging, str(args.log_level).upper(), logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        written = COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"elspot: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ElspotError, OSError, ValueError, KeyError, json.JSONDecodeError) as exc:
        print(f"elspot: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_DATA
    for p in written:
        print(os.fspath(p))
    return 0
