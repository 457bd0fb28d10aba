"""Command-line entry point.

Subcommands read and write plain CSV (header row, UTF-8, '.' decimals) and
flat JSON result documents. Every option can also be given in an INI file
passed with ``--config``; the section named after the subcommand supplies
defaults that explicit flags override. Set ``REGARCH_LOG_LEVEL`` to control
logging verbosity.

On failure a command writes ``<out>.error.json`` next to its intended output
and exits with a nonzero status. Exit status 0 means no error document was
written.
"""
from __future__ import annotations

import argparse
import configparser
import csv
import datetime as _dt
import json
import logging
import math
import os
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from .diagnostics import describe
from .errors import ConvergenceError, RegarchError, ValidationError
from .estimation import MODEL_KINDS, FitOptions, fit
from .forecast import ForecastOptions, ForecastSeries, default_window, evaluate, forecast_recursive, forecast_rolling
from .measures import (
    RangeScaling,
    apply_proxy,
    proxy_adjustment,
    realized_kernel,
    realized_range_volatility,
    realized_variance,
)
from .models import EgarchParams, GarchParams, GjrParams, RegarchParams
from .series import DailyReturnSeries, IntradayGrid, RealizedMeasureSeries, align
from .simulation import HestonParams, SimConfig, simulate_intraday, simulate_model

logger = logging.getLogger("regarch")

LOG_ENV = "REGARCH_LOG_LEVEL"
MEASURE_FLAGS = {"rv": "RV", "rrv": "RRV", "rk": "RK"}
BAR_COLUMNS = ("date", "timestamp", "open", "high", "low", "close")
SESSION_OPEN = 9 * 3600


class UsageError(RegarchError):
    """Bad command-line usage."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


# --------------------------------------------------------------------------
# CSV helpers


def _num(x) -> str:
    return repr(float(x))


def _read_csv(path, required):
    """Rows of a headed CSV as dicts, with 1-based line numbers."""
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise ValidationError(f"{path}: empty file") from None
        missing = [c for c in required if c not in header]
        if missing:
            raise ValidationError(f"{path}: missing column {missing[0]!r}")
        rows = []
        for row in reader:
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(header):
                raise ValidationError(
                    f"{path}: line {reader.line_num}: expected {len(header)} fields, got {len(row)}"
                )
            rows.append((reader.line_num, dict(zip(header, (c.strip() for c in row)))))
    return header, rows


def _float(value, path, line, column):
    try:
        v = float(value)
    except ValueError:
        raise ValidationError(f"{path}: line {line}: {column} {value!r} is not a number") from None
    if not math.isfinite(v):
        raise ValidationError(f"{path}: line {line}: {column} is not finite")
    return v


def _write_csv(path, header, rows):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def _write_json(path, doc):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(doc, sort_keys=True, indent=2, allow_nan=True) + "\n", encoding="utf-8")


def read_returns(path) -> DailyReturnSeries:
    _, rows = _read_csv(path, ("date", "return"))
    return DailyReturnSeries(
        [r["date"] for _, r in rows], [_float(r["return"], path, ln, "return") for ln, r in rows]
    )


def read_measures(path, kinds=None) -> list[RealizedMeasureSeries]:
    """One series per distinct ``kind`` in the file, in order of appearance."""
    _, rows = _read_csv(path, ("date", "kind", "value"))
    groups: dict[str, tuple[list, list]] = {}
    for ln, r in rows:
        d, v = groups.setdefault(r["kind"], ([], []))
        d.append(r["date"])
        v.append(_float(r["value"], path, ln, "value"))
    if kinds:
        unknown = [k for k in kinds if k not in groups]
        if unknown:
            raise ValidationError(f"{path}: no rows of kind {unknown[0]!r}")
        groups = {k: groups[k] for k in groups if k in kinds}
    return [RealizedMeasureSeries(d, v, k) for k, (d, v) in groups.items()]


def write_measures(path, series):
    rows = [(d, s.kind, _num(v)) for s in series for d, v in zip(s.dates, s.values)]
    rows.sort(key=lambda x: x[0])
    _write_csv(path, ("date", "kind", "value"), rows)


def _parse_seconds(stamp: str, path, line) -> int:
    try:
        return int(stamp)
    except ValueError:
        pass
    try:
        t = _dt.time.fromisoformat(stamp)
    except ValueError:
        try:
            t = _dt.datetime.fromisoformat(stamp).time()
        except ValueError:
            raise ValidationError(f"{path}: line {line}: unreadable timestamp {stamp!r}") from None
    return t.hour * 3600 + t.minute * 60 + t.second


def read_bars(path, interval: int | None = None) -> list[IntradayGrid]:
    """Group bar rows by date into equidistant log-price grids."""
    _, rows = _read_csv(path, BAR_COLUMNS)
    days: dict[str, list] = {}
    order = []
    last = None
    for ln, r in rows:
        d = r["date"]
        if d != last and d in days:
            raise ValidationError(f"{path}: line {ln}: rows for {d} are not contiguous")
        if d not in days:
            days[d] = []
            order.append(d)
        last = d
        px = [_float(r[c], path, ln, c) for c in ("open", "high", "low", "close")]
        if min(px) <= 0:
            raise ValidationError(f"{path}: line {ln}: prices must be positive")
        days[d].append((ln, _parse_seconds(r["timestamp"], path, ln), px))
    grids = []
    for d in order:
        bars = days[d]
        secs = np.array([b[1] for b in bars])
        step = np.diff(secs)
        if step.size and (np.any(step != step[0]) or step[0] <= 0):
            bad = int(np.nonzero(step != step[0])[0][0]) + 1 if np.any(step != step[0]) else 1
            raise ValidationError(f"{path}: line {bars[bad][0]}: timestamps on {d} are not equidistant")
        dt = int(step[0]) if step.size else (interval or 300)
        if interval is not None and dt != interval:
            raise ValidationError(f"{path}: {d}: bar interval {dt}s differs from --interval {interval}s")
        px = np.array([b[2] for b in bars])
        try:
            grids.append(IntradayGrid.from_prices(d, *px.T, interval_seconds=dt))
        except ValidationError as exc:
            raise ValidationError(f"{path}: line {bars[0][0]}: {exc}") from None
    return grids


def read_forecast(path, model=None) -> ForecastSeries:
    _, rows = _read_csv(path, ("date", "h_hat"))
    return ForecastSeries(
        [r["date"] for _, r in rows],
        [_float(r["h_hat"], path, ln, "h_hat") for ln, r in rows],
        scheme="",
        window=0,
        model=model or Path(path).stem,
    )


def read_single_series(path, log=False):
    """A dated single-value series: ``date,<value>`` or a measures file of one kind."""
    header, rows = _read_csv(path, ("date",))
    if "kind" in header and "value" in header:
        kinds = {r["kind"] for _, r in rows}
        if len(kinds) != 1:
            raise ValidationError(f"{path}: expected one measure kind, found {sorted(kinds)}")
        col = "value"
    else:
        cols = [c for c in header if c != "date"]
        if len(cols) != 1:
            raise ValidationError(f"{path}: expected date plus one value column")
        col = cols[0]
    x = np.array([_float(r[col], path, ln, col) for ln, r in rows])
    if log:
        if np.any(x <= 0):
            raise ValidationError(f"{path}: --log needs positive values")
        x = np.log(x)
    return col, x


# --------------------------------------------------------------------------
# commands


def cmd_measures(args) -> dict:
    kinds = ["rv", "rrv", "rk"] if args.all or not args.kind else list(dict.fromkeys(args.kind))
    grids = read_bars(args.bars, args.interval)
    scaling = RangeScaling(lambda2m=args.lambda2m, m=args.m)
    fns = {
        "rv": realized_variance,
        "rrv": lambda g: realized_range_volatility(g, scaling),
        "rk": realized_kernel,
    }
    rows = []
    for g in grids:
        for k in kinds:
            rows.append((g.date, MEASURE_FLAGS[k], _num(fns[k](g))))
    _write_csv(args.out, ("date", "kind", "value"), rows)
    return {"days": len(grids), "kinds": ",".join(MEASURE_FLAGS[k] for k in kinds), "lambda2m": args.lambda2m}


def cmd_proxy(args) -> dict:
    returns = read_returns(args.returns)
    (rk,) = read_measures(args.rk, [args.kind])
    data = align(returns, [rk])
    adj = proxy_adjustment(data.returns, data.measures[0])
    write_measures(args.out, [apply_proxy(data.measures[0], adj)])
    _write_json(Path(str(args.out) + ".json"), {"c_hat": adj.c_hat, "T": data.T, "source_kind": args.kind})
    return {"c_hat": adj.c_hat}


def _dataset(args, need_measures):
    returns = read_returns(args.returns)
    measures = []
    for p in args.measures or ():
        measures.extend(read_measures(p, args.kinds.split(",") if args.kinds else None))
    if need_measures and not measures:
        raise UsageError("regarch needs at least one --measures file")
    if not need_measures:
        measures = []
    return align(returns, measures, policy=args.align)


def _fit_options(args, **kw) -> FitOptions:
    return FitOptions(seed=args.seed, n_starts=args.n_starts, free_phi=args.free_phi,
                      stationarity=not args.no_stationarity, **kw)


def _fit_document(res, data, seed) -> dict:
    doc = {
        "model": res.model,
        "seed": seed,
        "T": res.T,
        "K": len(data.measures),
        "measures": ",".join(m.kind for m in data.measures),
        "first_date": str(data.dates[0]),
        "last_date": str(data.dates[-1]),
        "loglik_joint": res.loglik_joint,
        "loglik_return": res.loglik_return,
        "aic": res.aic,
        "sbic": res.sbic,
        "n_params": res.n_params,
        "converged": res.converged,
        "n_iterations": res.n_iterations,
        "grad_norm": res.grad_norm,
        "free_phi": res.free_phi,
    }
    for name, v, s in zip(res.names, res.estimates, res.std_errors):
        doc[f"param.{name}"] = float(v)
        doc[f"se.{name}"] = float(s)
    return doc


def cmd_fit(args) -> dict:
    data = _dataset(args, args.model == "regarch")
    try:
        res = fit(args.model, data, _fit_options(args))
    except ConvergenceError as exc:
        if exc.best is not None:
            raise ConvergenceError(f"{exc} (best loglik {exc.best.loglik_joint:.6f})", exc.best) from None
        raise
    doc = _fit_document(res, data, args.seed)
    _write_json(args.out, doc)
    return doc


def cmd_forecast(args) -> dict:
    data = _dataset(args, args.model == "regarch")
    k = default_window(data.T) if args.k is None else args.k
    opts = ForecastOptions(fit=_fit_options(args, compute_se=False), refit_stride=args.refit_stride,
                           warm_start=not args.cold_start)
    run = forecast_recursive if args.scheme == "recursive" else forecast_rolling
    fc = run(args.model, data, k, opts)
    _write_csv(args.out, ("date", "h_hat"), [(d, _num(h)) for d, h in zip(fc.dates, fc.h_hat)])
    sidecar = {
        "model": args.model, "scheme": args.scheme, "k": k, "T": data.T, "seed": args.seed,
        "refit_stride": args.refit_stride, "measures": [m.kind for m in data.measures],
        "origins": list(fc.refit_results),
    }
    _write_json(Path(str(args.out) + ".refits.json"), sidecar)
    return {"rows": len(fc), "k": k}


def cmd_evaluate(args) -> dict:
    returns = read_returns(args.returns)
    proxies = read_measures(args.proxy, [args.proxy_kind] if args.proxy_kind else None)
    if len(proxies) != 1:
        raise UsageError("proxy file holds several kinds; choose one with --proxy-kind")
    proxy = proxies[0]
    names = args.names.split(",") if args.names else [Path(p).stem for p in args.forecasts]
    if len(names) != len(args.forecasts) or len(set(names)) != len(names):
        raise UsageError("--names must give one distinct name per forecast file")
    doc = {"n_models": len(names), "proxy_kind": proxy.kind, "models": ",".join(names)}
    fcs = [read_forecast(p, n) for p, n in zip(args.forecasts, names)]
    for name, fc in zip(names, fcs):
        rep = evaluate(fc, proxy, returns)
        doc[f"{name}.mse"] = rep.mse
        doc[f"{name}.qlike"] = rep.qlike
        doc[f"{name}.loglik_out"] = rep.loglik_out
        doc[f"{name}.n_evaluated"] = rep.n_evaluated
    dates = fcs[0].dates
    for fc in fcs[1:]:
        if not np.array_equal(fc.dates, dates):
            raise ValidationError(f"forecast {fc.model!r} covers different dates than {fcs[0].model!r}")
    pv = dict(zip(proxy.dates, proxy.values))
    rows = [(d, _num(pv[d]), *(_num(fc.h_hat[i]) for fc in fcs)) for i, d in enumerate(dates)]
    plot = Path(args.plot) if args.plot else Path(str(args.out) + ".plot.csv")
    _write_csv(plot, ("date", "proxy", *names), rows)
    _write_json(args.out, doc)
    return doc


def cmd_describe(args) -> dict:
    name, x = read_single_series(args.series, log=args.log)
    rep = describe(x, lb_lags=args.lags, lb_adjust=args.lb_adjust)
    doc = {"series": name, "log": bool(args.log), **rep.to_dict()}
    _write_json(args.out, doc)
    return doc


# ---- simulate


def _floats(text) -> list[float]:
    return [float(t) for t in str(text).replace(";", ",").split(",") if t.strip()]


def _matrix(text, K) -> np.ndarray:
    rows = [_floats(r) for r in str(text).split(";") if r.strip()]
    if K == 1 and len(rows) == 1 and len(rows[0]) == 1:
        return np.array([[rows[0][0]]])
    M = np.array(rows, dtype=float)
    if M.shape != (K, K):
        raise ValidationError(f"sigma must be a {K}x{K} matrix with rows separated by ';'")
    return M


def load_sim_config(path) -> tuple[SimConfig, dict]:
    """Parse a simulation INI file into a :class:`SimConfig` and output flags."""
    cp = configparser.ConfigParser()
    try:
        with open(path, encoding="utf-8") as fh:
            cp.read_file(fh)
    except (configparser.Error, UnicodeDecodeError) as exc:
        raise ValidationError(f"{path}: {exc}") from None
    if not cp.has_section("simulate"):
        raise ValidationError(f"{path}: missing [simulate] section")
    s = cp["simulate"]
    known = {"dgp", "seed", "t", "n", "m", "sigma", "mu", "noise_std", "measure_kinds", "start_date", "bars"}
    extra = set(s) - known - set(cp.defaults())
    if extra:
        raise ValidationError(f"{path}: unknown [simulate] key {sorted(extra)[0]!r}")
    dgp = s.get("dgp", "garch")
    P = cp["params"] if cp.has_section("params") else {}

    def g(name, default=None):
        if name in P:
            return float(P[name])
        if default is None:
            raise ValidationError(f"{path}: [params] needs {name!r} for dgp {dgp!r}")
        return default

    try:
        if dgp == "garch":
            params = GarchParams(g("omega"), g("alpha"), g("beta"))
        elif dgp == "gjr":
            params = GjrParams(g("omega"), g("alpha"), g("beta"), g("tau"))
        elif dgp == "egarch":
            params = EgarchParams(g("omega"), g("beta"), g("tau11"), g("tau12"))
        elif dgp == "regarch":
            gamma = _floats(P.get("gamma", ""))
            K = len(gamma)
            params = RegarchParams(
                g("omega"), g("beta"), g("tau1"), g("tau2"), gamma,
                _floats(P.get("xi", "")), _floats(P.get("delta1", "")), _floats(P.get("delta2", "")),
                _matrix(P.get("sigma", ""), K), _floats(P["phi"]) if "phi" in P else None,
            )
        elif dgp == "heston-like":
            params = HestonParams(g("v0", 1.0), g("kappa", 0.03), g("theta", 1.0), g("eta", 0.2), g("rho", -0.5))
        else:
            params = None
        kinds = tuple(k.strip() for k in s["measure_kinds"].split(",")) if "measure_kinds" in s else None
        cfg = SimConfig(
            seed=s.getint("seed", 0), T=s.getint("T", 1000), n=s.getint("n", 78), m=s.getint("m", 1),
            dgp=dgp, true_params=params, sigma=s.getfloat("sigma", 1.0), mu=s.getfloat("mu", 0.0),
            noise_std=s.getfloat("noise_std", 0.0), measure_kinds=kinds,
            start_date=s.get("start_date", "2010-01-04"),
        )
        bars = s.getboolean("bars", True)
    except (ValueError, KeyError) as exc:
        if isinstance(exc, RegarchError):
            raise
        raise ValidationError(f"{path}: {exc}") from None
    return cfg, {"bars": bars}


def _bar_rows(grids):
    for g in grids:
        for j in range(g.n):
            sec = SESSION_OPEN + (j + 1) * g.interval_seconds
            stamp = f"{sec // 3600:02d}:{sec % 3600 // 60:02d}:{sec % 60:02d}"
            yield (g.date, stamp, _num(math.exp(g.open[j])), _num(math.exp(g.high[j])),
                   _num(math.exp(g.low[j])), _num(math.exp(g.close[j])))


def cmd_simulate(args) -> dict:
    cfg, flags = load_sim_config(args.config_file)
    if args.seed is not None:
        cfg = replace(cfg, seed=args.seed)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    intraday = cfg.dgp in ("brownian", "heston-like")
    sim = simulate_intraday(cfg, keep_grids=flags["bars"]) if intraday else simulate_model(cfg)
    r = sim.returns
    _write_csv(out / "returns.csv", ("date", "return"), [(d, _num(v)) for d, v in zip(r.dates, r.returns)])
    _write_csv(out / "true_variance.csv", ("date", "true_h"), [(d, _num(v)) for d, v in zip(r.dates, sim.true_h)])
    files = ["returns.csv", "true_variance.csv"]
    if intraday and flags["bars"]:
        _write_csv(out / "bars.csv", BAR_COLUMNS, _bar_rows(sim.grids))
        files.append("bars.csv")
    for i, m in enumerate(sim.measures, start=1):
        name = f"measure{i}_{m.kind}.csv"
        write_measures(out / name, [m])
        files.append(name)
    doc = {"dgp": cfg.dgp, "seed": cfg.seed, "T": cfg.T, "n": cfg.n, "m": cfg.m, "files": ",".join(files)}
    _write_json(out / "simulate.json", doc)
    return doc


# --------------------------------------------------------------------------
# parser


def _add_data_args(p):
    p.add_argument("--returns", required=True, help="CSV with columns date,return (percent)")
    p.add_argument("--measures", action="append", default=[], metavar="CSV",
                   help="measures CSV (date,kind,value); repeat for several files")
    p.add_argument("--kinds", help="comma-separated measure kinds to keep, in file order")
    p.add_argument("--model", required=True, choices=MODEL_KINDS)
    p.add_argument("--align", default="intersect", choices=("intersect", "strict"))
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--n-starts", type=int, default=5)
    p.add_argument("--free-phi", action="store_true", help="estimate phi instead of fixing it at 1")
    p.add_argument("--no-stationarity", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="regarch", description="Realized EGARCH volatility modelling toolkit.")
    parser.add_argument("--config", help="INI file; section [<command>] supplies option defaults")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("measures", help="daily realized measures from intraday bars")
    p.add_argument("--bars", required=True, help="CSV date,timestamp,open,high,low,close")
    p.add_argument("--out", required=True)
    grp = p.add_mutually_exclusive_group()
    grp.add_argument("--kind", action="append", choices=sorted(MEASURE_FLAGS), help="repeatable")
    grp.add_argument("--all", action="store_true", help="RV, RRV and RK (default)")
    sc = p.add_mutually_exclusive_group()
    sc.add_argument("--lambda2m", type=float, default=2.0, help="range scaling constant (default 2)")
    sc.add_argument("--continuous-range", dest="lambda2m", action="store_const", const=4 * math.log(2),
                    help="use the continuous-path constant 4 ln 2")
    p.add_argument("--m", type=int, default=None, help="points per bar the scaling refers to")
    p.add_argument("--interval", type=int, default=None, help="expected bar length in seconds")
    p.set_defaults(func=cmd_measures)

    p = sub.add_parser("proxy", help="scale RK to close-to-close variance")
    p.add_argument("--returns", required=True)
    p.add_argument("--rk", required=True, help="measures CSV containing the RK rows")
    p.add_argument("--kind", default="RK")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_proxy)

    p = sub.add_parser("fit", help="QML estimation")
    _add_data_args(p)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("forecast", help="one-step-ahead variance forecasts")
    _add_data_args(p)
    p.add_argument("--scheme", required=True, choices=("recursive", "rolling"))
    p.add_argument("--k", type=int, default=None, help="estimation window; default floor(3T/4)")
    p.add_argument("--refit-stride", type=int, default=1)
    p.add_argument("--cold-start", action="store_true", help="do not warm-start refits")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_forecast)

    p = sub.add_parser("evaluate", help="forecast losses against a proxy")
    p.add_argument("--forecasts", required=True, nargs="+")
    p.add_argument("--names", help="comma-separated model names; default file stems")
    p.add_argument("--proxy", required=True)
    p.add_argument("--proxy-kind")
    p.add_argument("--returns", required=True)
    p.add_argument("--plot", help="plot-data CSV; default <out>.plot.csv")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("describe", help="descriptive statistics of a dated series")
    p.add_argument("--series", required=True)
    p.add_argument("--log", action="store_true", help="describe the log of the values")
    p.add_argument("--lags", type=int, default=10)
    p.add_argument("--lb-adjust", default="heteroskedasticity", choices=("none", "heteroskedasticity"))
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_describe)

    p = sub.add_parser("simulate", help="simulate a dataset from an INI config")
    p.add_argument("config_file")
    p.add_argument("--seed", type=int, default=None, help="override the config seed")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_simulate)
    return parser


def _apply_config(parser, sub_name, path):
    cp = configparser.ConfigParser()
    with open(path, encoding="utf-8") as fh:
        cp.read_file(fh)
    if not cp.has_section(sub_name):
        return
    subparser = next(a for a in parser._actions if isinstance(a, argparse._SubParsersAction)).choices[sub_name]
    actions = {a.dest: a for a in subparser._actions}
    defaults = {}
    for key, raw in cp[sub_name].items():
        dest = key.replace("-", "_")
        a = actions.get(dest)
        if a is None or dest == "help":
            raise UsageError(f"{path}: unknown option {key!r} in [{sub_name}]")
        if isinstance(a, (argparse._StoreTrueAction, argparse._StoreFalseAction)):
            defaults[dest] = cp[sub_name].getboolean(key)
        elif isinstance(a, argparse._AppendAction) or a.nargs == "+":
            defaults[dest] = [(a.type or str)(v.strip()) for v in raw.split(",") if v.strip()]
        else:
            defaults[dest] = (a.type or str)(raw)
        if a.choices is not None:
            vals = defaults[dest] if isinstance(defaults[dest], list) else [defaults[dest]]
            if any(v not in a.choices for v in vals):
                raise UsageError(f"{path}: invalid value {raw!r} for {key!r}")
        if a.required:
            a.required = False
    subparser.set_defaults(**defaults)


def _error_path(argv):
    out = None
    for i, tok in enumerate(argv):
        if tok == "--out" and i + 1 < len(argv):
            out = argv[i + 1]
        elif tok.startswith("--out="):
            out = tok.split("=", 1)[1]
    if out is None:
        return None
    if "simulate" in argv:
        return Path(out) / "simulate.error.json"
    return Path(out + ".error.json")


def _configure_logging():
    level = os.environ.get(LOG_ENV, "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s")


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    _configure_logging()
    parser = build_parser()
    err_path = _error_path(argv)
    try:
        cfg = _config_arg(argv)
        if cfg is not None:
            cmd = next((t for t in argv if t in _COMMANDS), None)
            if cmd is not None:
                _apply_config(parser, cmd, cfg)
        args = parser.parse_args(argv)
        if err_path is not None and err_path.exists():
            err_path.unlink()
        args.func(args)
        return 0
    except (RegarchError, OSError, configparser.Error) as exc:
        logger.error("%s", exc)
        print(f"error: {exc}", file=sys.stderr)
        if err_path is not None:
            doc = {"error": type(exc).__name__, "message": str(exc), "argv": " ".join(argv)}
            if isinstance(exc, ConvergenceError) and exc.best is not None:
                doc["grad_norm"] = exc.best.grad_norm
                doc["loglik_joint"] = exc.best.loglik_joint
            _write_json(err_path, doc)
        return 2 if isinstance(exc, UsageError) else 1


_COMMANDS = ("measures", "proxy", "fit", "forecast", "evaluate", "describe", "simulate")


def _config_arg(argv):
    for i, tok in enumerate(argv):
        if tok == "--config" and i + 1 < len(argv):
            return argv[i + 1]
        if tok.startswith("--config="):
            return tok.split("=", 1)[1]
    return None


if __name__ == "__main__":
    sys.exit(main())
