"""Command-line entry point: ``cryptoeff <command> [flags] --out DIR``.

Every command writes its artifacts plus ``manifest.txt`` under ``--out``.
Flags can also come from a flat ``key = value`` file passed with
``--config``; command-line flags win. Exit codes: 0 success, 1 when the
inputs were all rejected (or another data error), 2 for usage errors.
"""
from __future__ import annotations

import argparse
import hashlib
import sys
from dataclasses import dataclass, field
from pathlib import Path

from . import __version__
from . import arima as arima_mod
from . import backtest as bt
from . import econometrics as eco
from . import report
from . import sentiment as senti
from . import stochastic as sto
from .errors import ArgumentCountError, CryptoEffError, DomainError, EmptyUniverse
from .market_data import (MIN_LEN_ADF, MIN_LEN_BACKTEST, daily_returns, load_ohlcv,
                          load_universe, slice_period)

COMMANDS = ("ingest", "backtest", "randombetter", "adf", "correlate", "dist", "classify",
            "arima", "simulate", "price", "qtm", "sentiment", "report")

# arguments that never affect artifacts and stay out of the manifest
_NOT_RECORDED = {"out", "config", "command"}


class UsageError(Exception):
    pass


@dataclass
class RunManifest:
    command: str
    args: dict
    seed: int | None = None
    inputs: dict = field(default_factory=dict)  # path -> sha256
    version: str = __version__
    rejections: dict = field(default_factory=dict)

    def add_input(self, path):
        path = Path(path)
        if path.is_dir():
            for p in sorted(path.iterdir()):
                if p.is_file():
                    self.add_input(p)
        elif path.is_file():
            self.inputs[str(path)] = hashlib.sha256(path.read_bytes()).hexdigest()

    def to_text(self) -> str:
        lines = [f"command={self.command}", f"version={self.version}",
                 f"seed={'' if self.seed is None else self.seed}"]
        lines += [f"arg.{k}={_fmt(v)}" for k, v in sorted(self.args.items())]
        lines += [f"input.{k}={v}" for k, v in sorted(self.inputs.items())]
        lines += [f"rejected.{k}={v}" for k, v in sorted(self.rejections.items())]
        return "\n".join(lines) + "\n"


def _fmt(v) -> str:
    if isinstance(v, (list, tuple)):
        return ",".join(str(x) for x in v)
    return "" if v is None else str(v)


def read_config(path) -> dict:
    """Flat ``key = value`` lines; ``#`` starts a comment; dashes equal underscores."""
    out = {}
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"config line {lineno}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        out[key.replace("-", "_")] = value
    return out


class _Writer:
    def __init__(self, out_dir):
        self.root = Path(out_dir)
        self.root.mkdir(parents=True, exist_ok=True)

    def write(self, name: str, text: str) -> Path:
        path = self.root / name
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        return path


def _need(args, *names):
    missing = [n for n in names if getattr(args, n, None) is None]
    if missing:
        raise UsageError("missing required flag(s): " + ", ".join("--" + m.replace("_", "-") for m in missing))


def _period(args):
    if args.start is None and args.end is None:
        return None
    return (args.start or "0001-01-01", args.end or "9999-12-31")


def _universe(args, manifest, min_len):
    _need(args, "universe")
    manifest.add_input(args.universe)
    load = load_universe(args.universe, min_len, _period(args))
    manifest.rejections.update(load.rejections)
    if not load.series:
        raise EmptyUniverse(f"no valid asset in {args.universe} ({load.attempted} attempted)")
    return load


# --- commands -------------------------------------------------------------

def cmd_ingest(args, w, manifest):
    _need(args, "universe")
    manifest.add_input(args.universe)
    load = load_universe(args.universe, args.min_len, _period(args))
    manifest.rejections.update(load.rejections)
    rows = [(s.symbol, len(s), s.dates[0], s.dates[-1], "ok") for s in load.series]
    rows += [(sym, "", "", "", reason) for sym, reason in load.rejections.items()]
    rows.sort(key=lambda r: r[0])
    w.write("universe.tsv", report.tsv(("symbol", "rows", "first", "last", "status"), rows))
    if not load.series:
        raise EmptyUniverse(f"all {load.attempted} inputs rejected")
    return f"{len(load.series)} of {load.attempted} assets valid"


def cmd_backtest(args, w, manifest):
    load = _universe(args, manifest, args.min_len)
    res = bt.is_sma_better(load.series, args.n, args.r, args.seed, args.mode, args.band,
                           universe_size=load.attempted)
    table = report.render_sma_better(res)
    w.write("sma_better.tsv", table)
    w.write("per_asset.tsv", report.render_per_asset(res))
    return table


def cmd_randombetter(args, w, manifest):
    load = _universe(args, manifest, args.min_len)
    res = bt.is_random_better(load.series, args.n_iter, args.k, args.seed,
                              replace=not args.without_replacement, universe_size=load.attempted)
    table = report.render_random_better([res])
    w.write("random_better.tsv", table)
    w.write("per_asset.tsv", report.render_per_asset(res))
    return table


def cmd_adf(args, w, manifest):
    load = _universe(args, manifest, args.min_len)
    screen = eco.random_walk_share(load.series, args.min_len, log=args.log)
    manifest.rejections.update(screen.skipped)
    text = report.render_adf(screen)
    w.write("adf.tsv", text)
    return text


def cmd_correlate(args, w, manifest):
    if len(args.files) != 2:
        raise UsageError("correlate takes exactly two CSV files")
    for f in args.files:
        manifest.add_input(f)
    a, b = (daily_returns(load_ohlcv(f)) for f in args.files)
    r = eco.pearson_corr(a, b)
    text = report.tsv(("a", "b", "n_overlap", "pearson_r"), [(r.symbol_a, r.symbol_b, r.n_overlap, f"{r.pearson_r:.6f}")])
    w.write("correlation.tsv", text)
    return text


def cmd_dist(args, w, manifest):
    manifest.add_input(args.file)
    d = eco.distribution_stats(daily_returns(load_ohlcv(args.file)), bins=args.bins)
    text = report.render_distribution(d)
    w.write("stats.tsv", text)
    w.write("histogram.csv", report.render_histogram(d))
    return text


def cmd_classify(args, w, manifest):
    from .ml.features import build_features
    from .ml.selection import average_accuracy

    _need(args, "n")
    load = _universe(args, manifest, args.min_len)
    if args.dump_features:
        ds = build_features(load.series[0], args.n)
        w.write(args.dump_features, ds.to_csv())
    rep = average_accuracy(load.series, args.n, args.seed, n_samples=args.n_samples)
    manifest.rejections.update(rep.skipped)
    rows = []
    for a in rep.assets:
        w.write(f"confusion/{a.symbol}.csv", a.confusion.to_csv())
        rows.append((a.symbol, a.n_rows, a.split_index, a.C, a.gamma, f"{a.accuracy:.4f}"))
    summary = report.tsv(("symbol", "rows", "split", "C", "gamma", "accuracy"), rows)
    summary += f"# average accuracy: {rep.percent}%\n"
    w.write("accuracy.tsv", summary)
    return summary


def cmd_arima(args, w, manifest):
    _need(args, "input")
    manifest.add_input(args.input)
    series = load_ohlcv(args.input)
    if _period(args) is not None:
        series = slice_period(series, *_period(args))
    fit = arima_mod.fit_arima(series, args.p)
    text = arima_mod.arima_report(fit)
    w.write("arima.txt", text)
    if args.forecast:
        fc = arima_mod.forecast(fit, series.close, args.forecast)
        w.write("forecast.csv", fc.to_csv())
        text += "\n" + fc.to_csv()
    return text


def cmd_simulate(args, w, manifest):
    if args.model == "gbm":
        paths = sto.simulate_gbm(sto.GbmParams(args.s0, args.mu, args.sigma), args.dt, args.steps,
                                 args.seed, args.paths, arithmetic=args.arithmetic)
        w.write("paths.csv", report.paths_csv(paths, args.dt))
        return f"{args.paths} GBM paths, {args.steps} steps\n"
    params = sto.HestonParams(args.s0, args.v0, args.r, args.kappa, args.theta, args.sigma_v, args.rho)
    res = sto.simulate_heston(params, args.dt, args.steps, args.seed, args.paths)
    w.write("paths.csv", report.paths_csv(res.prices, args.dt))
    w.write("variance.csv", report.paths_csv(res.variances, args.dt))
    return (f"{args.paths} Heston paths, {args.steps} steps, feller ratio {params.feller_ratio:.4f}, "
            f"variance floor touches {res.floor_touches}\n")


def cmd_price(args, w, manifest):
    if args.model == "bs":
        _need(args, "s", "k", "t", "sigma")
        q = sto.black_scholes_call(args.s, args.k, args.r, args.t, args.sigma)
        vega = sto.black_scholes_vega(args.s, args.k, args.r, args.t, args.sigma)
        rows = [("call", repr(q.call_price)), ("put", repr(q.put_price)), ("vega", repr(vega))]
    else:
        _need(args, "d1", "k", "g")
        rows = [("value", repr(sto.gordon_shapiro(args.d1, args.k, args.g)))]
    text = report.tsv(("quantity", "value"), rows)
    w.write("price.tsv", text)
    return text


def cmd_qtm(args, w, manifest):
    res = sto.quantity_theory_solve(M=args.m, V=args.v, P=args.p, Y=args.y)
    text = report.tsv(("symbol", "value"), [(k, repr(v) if isinstance(v, float) else v) for k, v in res.items()])
    w.write("qtm.tsv", text)
    return text


def cmd_sentiment(args, w, manifest):
    if args.action == "replay":
        _need(args, "events")
        manifest.add_input(args.events)
        text = senti.render_ledger(senti.replay(senti.read_events(args.events)))
        w.write("output.txt", text)
        return text
    _need(args, "corpus")
    manifest.add_input(args.corpus)
    keywords = [k for k in args.keywords.split(",") if k]
    lexicon = senti.load_lexicon(args.lexicon) if args.lexicon else None
    if args.lexicon:
        manifest.add_input(args.lexicon)
    score = senti.score_batches(senti.load_corpus(args.corpus, keywords, args.nb), lexicon, args.precise)
    text = score.to_csv()
    w.write("sentiment.csv", text)
    return text


def cmd_report(args, w, manifest):
    """Both universe experiments and the ADF screen in a single text file."""
    load = _universe(args, manifest, args.min_len)
    sma_res = bt.is_sma_better(load.series, args.n, args.r, args.seed, args.mode, args.band,
                               universe_size=load.attempted)
    rb = bt.is_random_better(load.series, args.n_iter, args.k, args.seed, universe_size=load.attempted)
    screen = eco.random_walk_share(load.series, MIN_LEN_ADF)
    parts = ["## isRandomBetter", report.render_random_better([rb]), "## isSMABetter",
             report.render_sma_better(sma_res), "## ADF screen", report.render_adf(screen)]
    text = "\n".join(parts)
    w.write("report.txt", text)
    return text


# --- parser ---------------------------------------------------------------

def _add_universe(p, min_len):
    p.add_argument("--universe", metavar="DIR", help="directory of OHLCV CSV files")
    p.add_argument("--min-len", type=int, default=min_len)
    p.add_argument("--start", help="first date (inclusive)")
    p.add_argument("--end", help="last date (inclusive)")


def _add_sma(p):
    p.add_argument("--n", type=int, default=50, help="SMA window")
    p.add_argument("--r", type=float, default=20.0, help="band width in percent")
    p.add_argument("--mode", choices=bt.MODES, default="sameday")
    p.add_argument("--band", choices=bt.BANDS, default="multiplicative")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", default="out", metavar="DIR", help="output directory")
    common.add_argument("--config", metavar="FILE", help="key = value defaults")

    parser = argparse.ArgumentParser(prog="cryptoeff", description="Crypto market efficiency toolkit")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")
    sub.required = True

    p = sub.add_parser("ingest", parents=[common], help="load and screen a universe")
    _add_universe(p, MIN_LEN_BACKTEST)

    p = sub.add_parser("backtest", parents=[common], help="SMA reversion vs hold vs random")
    _add_universe(p, MIN_LEN_BACKTEST)
    _add_sma(p)
    p.add_argument("--seed", type=int, default=42)

    p = sub.add_parser("randombetter", parents=[common], help="random portfolios vs the universe mean")
    _add_universe(p, MIN_LEN_BACKTEST)
    p.add_argument("--n-iter", type=int, default=20)
    p.add_argument("--k", type=int, default=30)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--without-replacement", action="store_true")

    p = sub.add_parser("adf", parents=[common], help="random-walk share by ADF")
    _add_universe(p, MIN_LEN_ADF)
    p.add_argument("--log", action="store_true", help="test log prices")

    p = sub.add_parser("correlate", parents=[common], help="Pearson r of daily returns")
    p.add_argument("files", nargs="*", metavar="CSV")

    p = sub.add_parser("dist", parents=[common], help="return distribution and histogram")
    p.add_argument("file", metavar="CSV")
    p.add_argument("--bins", type=int, default=80)

    p = sub.add_parser("classify", parents=[common], help="SVM next-day classifier accuracy")
    _add_universe(p, MIN_LEN_BACKTEST)
    p.add_argument("--n", type=int, help="indicator window")
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--n-samples", type=int, default=10)
    p.add_argument("--dump-features", metavar="FILE", help="write the first asset's feature matrix")

    p = sub.add_parser("arima", parents=[common], help="ARIMA(p,1,0) fit report")
    p.add_argument("--input", metavar="CSV")
    p.add_argument("--p", type=int, default=4)
    p.add_argument("--forecast", type=int, default=0, metavar="H")
    p.add_argument("--start", help="first date (inclusive)")
    p.add_argument("--end", help="last date (inclusive)")

    p = sub.add_parser("simulate", parents=[common], help="GBM or Heston paths")
    p.add_argument("model", choices=("gbm", "heston"))
    p.add_argument("--s0", type=float, default=100.0)
    p.add_argument("--mu", type=float, default=0.05)
    p.add_argument("--sigma", type=float, default=0.2)
    p.add_argument("--arithmetic", action="store_true", help="additive (Bachelier) GBM variant")
    p.add_argument("--v0", type=float, default=0.04)
    p.add_argument("--r", type=float, default=0.0)
    p.add_argument("--kappa", type=float, default=2.0)
    p.add_argument("--theta", type=float, default=0.04)
    p.add_argument("--sigma-v", type=float, default=0.3)
    p.add_argument("--rho", type=float, default=0.0)
    p.add_argument("--dt", type=float, default=1 / 252)
    p.add_argument("--steps", type=int, default=365)
    p.add_argument("--paths", type=int, default=1)
    p.add_argument("--seed", type=int, default=42)

    p = sub.add_parser("price", parents=[common], help="Black-Scholes or Gordon-Shapiro value")
    p.add_argument("model", choices=("bs", "gordon"))
    for name in ("s", "k", "t", "sigma", "d1", "g"):
        p.add_argument(f"--{name}", type=float)
    p.add_argument("--r", type=float, default=0.0)

    p = sub.add_parser("qtm", parents=[common], help="solve M V = P Y for the missing symbol")
    for name in ("m", "v", "p", "y"):
        p.add_argument(f"--{name}", type=float)

    p = sub.add_parser("sentiment", parents=[common], help="lexicon scoring and bot replay")
    p.add_argument("action", choices=("replay", "score"))
    p.add_argument("--events", metavar="CSV", help="score,price rows")
    p.add_argument("--corpus", metavar="DIR")
    p.add_argument("--keywords", default=",".join(senti.DEFAULT_KEYWORDS))
    p.add_argument("--nb", type=int, default=senti.DEFAULT_NB)
    p.add_argument("--lexicon", metavar="TSV")
    p.add_argument("--precise", action="store_true", help="skip the 2-decimal rounding")

    p = sub.add_parser("report", parents=[common], help="both universe experiments plus the ADF screen")
    _add_universe(p, MIN_LEN_BACKTEST)
    _add_sma(p)
    p.add_argument("--n-iter", type=int, default=20)
    p.add_argument("--k", type=int, default=30)
    p.add_argument("--seed", type=int, default=42)
    return parser


HANDLERS = {name: globals()[f"cmd_{name}"] for name in COMMANDS}


def _subparsers(parser):
    for action in parser._actions:
        if isinstance(action, argparse._SubParsersAction):
            return action.choices
    return {}


def _apply_config(parser, config: dict, command: str | None):
    """Install config values as defaults of ``command``; unknown keys are usage errors."""
    subs = _subparsers(parser)
    if command not in subs:
        return
    sp = subs[command]
    actions = {a.dest: a for a in sp._actions}
    defaults = {}
    for key, value in config.items():
        a = actions.get(key)
        if a is None or key in ("help", "config"):
            raise UsageError(f"config key {key!r} is not a flag of {command!r}")
        if isinstance(a, argparse._StoreTrueAction):
            defaults[key] = value.lower() in ("1", "true", "yes", "on")
        else:
            defaults[key] = value
    sp.set_defaults(**defaults)


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        pre = argparse.ArgumentParser(add_help=False)
        pre.add_argument("--config")
        known, _ = pre.parse_known_args(argv)
        command = next((a for a in argv if a in COMMANDS), None)
        if known.config:
            _apply_config(parser, read_config(known.config), command)
    except (UsageError, OSError) as exc:
        parser.print_usage(sys.stderr)
        print(f"cryptoeff: error: {exc}", file=sys.stderr)
        return 2
    args = parser.parse_args(argv)  # exits with status 2 on bad flags

    recorded = {k: v for k, v in vars(args).items() if k not in _NOT_RECORDED}
    manifest = RunManifest(args.command, recorded, getattr(args, "seed", None))
    if args.config:
        manifest.add_input(args.config)
    writer = _Writer(args.out)
    try:
        text = HANDLERS[args.command](args, writer, manifest)
        status = 0
    except (UsageError, ArgumentCountError, DomainError) as exc:
        parser.print_usage(sys.stderr)
        print(f"cryptoeff {args.command}: error: {exc}", file=sys.stderr)
        return 2
    except CryptoEffError as exc:
        text = None
        status = 1
        print(f"cryptoeff {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
    writer.write("manifest.txt", manifest.to_text())
    if text:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")
    return status


def console() -> None:
    sys.exit(main())


if __name__ == "__main__":
    console()
