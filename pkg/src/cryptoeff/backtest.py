"""Hold, SMA mean-reversion and random strategies, and the two universe experiments.

Returns are in percent. Strategy returns are *sums* of signed daily percent
changes (not compounded); the hold return is point to point.

Two evaluation modes exist for signal strategies:

``"sameday"``
    the signal computed from today's close multiplies today's change. This
    peeks at the close it trades on. It is the default; prefer ``"causal"``
    for anything meant to be tradeable.
``"causal"``
    the signal computed at ``t`` is applied to the change from ``t`` to
    ``t + 1``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .errors import AlignmentError, EmptyUniverse, WindowTooLarge
from .indicators import sma
from .market_data import PriceSeries, pct_change
from .rng import as_generator, substream

MODES = ("sameday", "causal")
BANDS = ("multiplicative", "additive")

# Verdict thresholds on the rounded percentage.
RANDOM_BETTER_THRESHOLD = 51
SMA_BETTER_THRESHOLD = 50


def round_half_even(x: float) -> int:
    """Python's round-half-even, used for every reported percentage."""
    return int(round(x))


@dataclass(frozen=True)
class SignalSeries:
    dates: np.ndarray
    signals: np.ndarray  # int8 in {-1, 0, +1}

    def __post_init__(self):
        sig = np.asarray(self.signals, dtype=np.int8)
        if sig.size and not np.isin(sig, (-1, 0, 1)).all():
            raise ValueError("signals must be in {-1, 0, +1}")
        object.__setattr__(self, "signals", sig)

    def __len__(self) -> int:
        return len(self.signals)


@dataclass(frozen=True)
class BacktestResult:
    symbol: str
    strategy: str
    total_return_pct: float
    day_returns: np.ndarray | None = None

    @property
    def rounded(self) -> int:
        return round_half_even(self.total_return_pct)


@dataclass
class UniverseComparison:
    experiment: str
    universe_size: int
    valid_assets: int
    averages: dict
    pct_better: int
    verdict: bool
    params: dict = field(default_factory=dict)
    per_asset: list = field(default_factory=list)


def hold_return(series: PriceSeries) -> BacktestResult:
    """Buy at the first close, sell at the last."""
    c = series.close
    if len(c) == 0:
        raise EmptyUniverse(f"{series.symbol}: empty series")
    start, final = c[0], c[-1]
    return BacktestResult(series.symbol, "hold", (final - start) / start * 100.0)


def sma_reversion_signals(series: PriceSeries, n: int, r: float,
                          band: str = "multiplicative") -> SignalSeries:
    """Sell above the upper band, buy below the lower band around the lagged SMA.

    ``multiplicative``: bands ``SMA * (1 + r/100)`` and ``SMA / (1 + r/100)``
    (the default). ``additive``: ``SMA * (1 +/- r/100)``.
    Days without a defined SMA get signal 0.
    """
    if band not in BANDS:
        raise ValueError(f"band must be one of {BANDS}")
    if not 0 <= r <= 100:
        raise ValueError("r must be within [0, 100]")
    close = series.close
    if n > len(close):
        raise WindowTooLarge(f"window {n} exceeds series length {len(close)}")
    m = sma(close, n, lagged=True)
    width = 1.0 + r / 100.0
    if band == "multiplicative":
        upper, lower = m * width, m / width
    else:
        upper, lower = m * width, m * (1.0 - r / 100.0)
    sig = np.zeros(len(close), dtype=np.int8)
    with np.errstate(invalid="ignore"):
        sig[close > upper] = -1
        sig[close < lower] = 1
    return SignalSeries(series.dates, sig)


def signal_pnl(series: PriceSeries, signals: SignalSeries, mode: str = "sameday",
               strategy: str = "signals") -> BacktestResult:
    """Sum of ``change_t * position_t`` over the series.

    ``day_returns[i]`` belongs to the change ending at bar ``i + 1``.
    """
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}")
    if len(signals) != len(series) or not np.array_equal(signals.dates, series.dates):
        raise AlignmentError("signals are not aligned to the series dates")
    change = pct_change(series.close)
    sig = signals.signals.astype(np.float64)
    position = sig[1:] if mode == "sameday" else sig[:-1]
    day = change * position
    return BacktestResult(series.symbol, strategy, math.fsum(day.tolist()), day)


def random_signals(length: int, rng) -> np.ndarray:
    """Uniform draws on 1..9 mapped 7-9 -> +1, 1-3 -> -1, 4-6 -> 0."""
    rng = as_generator(rng)
    draws = rng.integers(1, 10, size=length)
    sig = np.zeros(length, dtype=np.int8)
    sig[draws > 6] = 1
    sig[draws < 4] = -1
    return sig


def sma_return(series, n, r, mode="sameday", band="multiplicative") -> BacktestResult:
    sig = sma_reversion_signals(series, n, r, band)
    return signal_pnl(series, sig, mode, strategy=f"sma_reversion({n}, {r})")


def random_return(series, rng, mode="sameday") -> BacktestResult:
    sig = SignalSeries(series.dates, random_signals(len(series), rng))
    return signal_pnl(series, sig, mode, strategy="random")


def is_sma_better(universe: Sequence[PriceSeries], n: int, r: float, seed: int, mode: str = "sameday",
                  band: str = "multiplicative", universe_size: int | None = None) -> UniverseComparison:
    """Share of assets where SMA strictly beats both hold and random.

    The random strategy of asset ``i`` draws from the substream
    ``("backtest", "random", i, symbol)``.
    """
    if not universe:
        raise EmptyUniverse("no valid asset in the universe")
    rows = []
    for i, s in enumerate(universe):
        sma_r = sma_return(s, n, r, mode, band).total_return_pct
        hold_r = hold_return(s).total_return_pct
        rand_r = random_return(s, substream(seed, "backtest", "random", i, s.symbol), mode).total_return_pct
        rows.append({"symbol": s.symbol, "hold": hold_r, "sma": sma_r, "random": rand_r,
                     "better": sma_r > hold_r and sma_r > rand_r})
    valid = len(rows)
    n_better = sum(row["better"] for row in rows)
    pct = round_half_even(n_better / valid * 100)
    averages = {k: math.fsum(row[k] for row in rows) / valid for k in ("hold", "sma", "random")}
    return UniverseComparison(
        experiment="isSMABetter",
        universe_size=valid if universe_size is None else universe_size,
        valid_assets=valid, averages=averages, pct_better=pct,
        verdict=pct >= SMA_BETTER_THRESHOLD,
        params={"n": n, "r": r, "seed": seed, "mode": mode, "band": band},
        per_asset=rows)


def random_portfolio(symbols: Sequence[str], k: int, rng, replace: bool = True) -> list:
    """``k`` uniform picks from ``symbols`` (with replacement by default)."""
    if not symbols:
        raise EmptyUniverse("cannot draw from an empty universe")
    if k < 1:
        raise ValueError("k must be >= 1")
    rng = as_generator(rng)
    idx = rng.choice(len(symbols), size=k, replace=replace)
    return [symbols[i] for i in idx.tolist()]


def is_random_better(universe: Sequence[PriceSeries], n_iter: int, k: int, seed: int,
                     replace: bool = True, universe_size: int | None = None) -> UniverseComparison:
    """Share of random k-asset portfolios whose mean hold return beats the universe mean.

    Means are compared exactly (rational arithmetic on the float returns), so
    a portfolio of assets identical to the universe never counts as better.
    """
    if not universe:
        raise EmptyUniverse("no valid asset in the universe")
    if n_iter < 1 or k < 1:
        raise ValueError("n_iter and k must be >= 1")
    returns = [hold_return(s).total_return_pct for s in universe]
    exact = [Fraction(x) for x in returns]
    baseline = sum(exact) / len(exact)
    rng = substream(seed, "randombetter", "portfolios")
    symbols = list(range(len(universe)))
    n_higher = 0
    for _ in range(n_iter):
        picks = random_portfolio(symbols, k, rng, replace)
        if sum(exact[i] for i in picks) / k > baseline:
            n_higher += 1
    pct = round_half_even(n_higher / n_iter * 100)
    return UniverseComparison(
        experiment="isRandomBetter",
        universe_size=len(universe) if universe_size is None else universe_size,
        valid_assets=len(universe), averages={"hold": float(baseline)}, pct_better=pct,
        verdict=pct >= RANDOM_BETTER_THRESHOLD,
        params={"n_iter": n_iter, "k": k, "seed": seed, "replace": replace},
        per_asset=[{"symbol": s.symbol, "hold": r} for s, r in zip(universe, returns)])
