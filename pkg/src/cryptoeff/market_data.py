"""OHLCV ingestion, slicing and data-quality screens.

Series are stored column-wise as float64 numpy arrays. Prices are parsed
with ``float`` (correctly rounded) and written back with ``repr``, so a
load/save/load cycle is exact.
"""
from __future__ import annotations

import csv
import datetime as dt
import io
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import (DuplicateDate, InvalidRange, MalformedRow, MissingFile,
                     SeriesRejected, TooShort, ZeroClose)

HEADER = ("date", "open", "high", "low", "close", "volume")

# Backtests need a (nearly) full year, unit-root screening needs 100 bars.
MIN_LEN_BACKTEST = 360
MIN_LEN_ADF = 100

BACKTEST_YEAR = (dt.date(2021, 1, 1), dt.date(2021, 12, 31))


@dataclass(frozen=True)
class Candle:
    date: dt.date
    open: float
    high: float
    low: float
    close: float
    volume: float


@dataclass(frozen=True, eq=False)
class PriceSeries:
    """Dated OHLCV bars for one symbol, strictly increasing in date."""

    symbol: str
    dates: np.ndarray  # datetime64[D]
    open: np.ndarray
    high: np.ndarray
    low: np.ndarray
    close: np.ndarray
    volume: np.ndarray

    def __post_init__(self):
        n = len(self.dates)
        for name in ("open", "high", "low", "close", "volume"):
            arr = np.asarray(getattr(self, name), dtype=np.float64)
            if arr.shape != (n,):
                raise ValueError(f"column {name!r} has shape {arr.shape}, expected ({n},)")
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        dates = np.asarray(self.dates, dtype="datetime64[D]")
        if n > 1:
            steps = np.diff(dates.astype(np.int64))
            if np.any(steps == 0):
                dup = dates[1:][steps == 0][0]
                raise DuplicateDate(dup.astype(dt.date))
            if np.any(steps < 0):
                raise ValueError("dates must be strictly increasing")
        dates.setflags(write=False)
        object.__setattr__(self, "dates", dates)

    def __len__(self) -> int:
        return len(self.dates)

    def __eq__(self, other) -> bool:
        if not isinstance(other, PriceSeries):
            return NotImplemented
        return self.symbol == other.symbol and all(
            np.array_equal(getattr(self, c), getattr(other, c))
            for c in ("dates", "open", "high", "low", "close", "volume"))

    __hash__ = None

    @classmethod
    def from_candles(cls, symbol: str, candles: Iterable[Candle]) -> "PriceSeries":
        candles = list(candles)
        return cls(
            symbol=symbol,
            dates=np.array([c.date for c in candles], dtype="datetime64[D]"),
            open=np.array([c.open for c in candles], dtype=np.float64),
            high=np.array([c.high for c in candles], dtype=np.float64),
            low=np.array([c.low for c in candles], dtype=np.float64),
            close=np.array([c.close for c in candles], dtype=np.float64),
            volume=np.array([c.volume for c in candles], dtype=np.float64),
        )

    @classmethod
    def from_closes(cls, symbol: str, closes: Sequence[float], start: dt.date = dt.date(2021, 1, 1),
                    volume: float = 1.0) -> "PriceSeries":
        """Daily series where open = high = low = close; handy for tests."""
        closes = np.asarray(closes, dtype=np.float64)
        dates = np.datetime64(start, "D") + np.arange(len(closes))
        return cls(symbol, dates, closes, closes, closes, closes, np.full(len(closes), volume))

    def candles(self) -> list[Candle]:
        return [Candle(d, o, h, lo, c, v) for d, o, h, lo, c, v in zip(
            self.dates.astype(dt.date).tolist(), self.open.tolist(), self.high.tolist(),
            self.low.tolist(), self.close.tolist(), self.volume.tolist())]

    def take(self, mask_or_index) -> "PriceSeries":
        return type(self)(self.symbol, self.dates[mask_or_index], self.open[mask_or_index],
                          self.high[mask_or_index], self.low[mask_or_index],
                          self.close[mask_or_index], self.volume[mask_or_index])


class ValidatedSeries(PriceSeries):
    """A PriceSeries that passed :func:`validate_series`."""


@dataclass(frozen=True)
class ReturnSeries:
    symbol: str
    dates: np.ndarray
    returns_pct: np.ndarray

    def __len__(self) -> int:
        return len(self.dates)


@dataclass
class UniverseLoad:
    """Result of loading and screening a directory of CSV files."""

    attempted: int
    series: list = field(default_factory=list)
    rejections: dict = field(default_factory=dict)  # symbol -> reason string


def _parse_date(text: str) -> dt.date:
    return dt.date.fromisoformat(text.strip())


def parse_ohlcv(text: str, symbol: str = "") -> PriceSeries:
    """Parse CSV text with the fixed ``date,open,high,low,close,volume`` header."""
    reader = csv.reader(io.StringIO(text, newline=""))
    try:
        header = next(reader)
    except StopIteration:
        raise MalformedRow(1, "missing header") from None
    if tuple(h.strip().lower() for h in header) != HEADER:
        raise MalformedRow(1, f"header must be {','.join(HEADER)}")
    rows = []
    seen = set()
    for lineno, row in enumerate(reader, start=2):
        if not row or all(not cell.strip() for cell in row):
            continue
        if len(row) != len(HEADER):
            raise MalformedRow(lineno, f"expected {len(HEADER)} fields, got {len(row)}")
        try:
            date = _parse_date(row[0])
            values = [float(cell) for cell in row[1:]]
        except ValueError as exc:
            raise MalformedRow(lineno, str(exc)) from None
        if not all(np.isfinite(values)):
            raise MalformedRow(lineno, "non-finite value")
        if date in seen:
            raise DuplicateDate(date)
        seen.add(date)
        rows.append((date, *values))
    rows.sort(key=lambda r: r[0])
    return PriceSeries.from_candles(symbol, (Candle(*r) for r in rows))


def load_ohlcv(path, symbol: str | None = None) -> PriceSeries:
    """Load one CSV file. Loading is permissive: price screens run in :func:`validate_series`."""
    path = Path(path)
    if not path.is_file():
        raise MissingFile(str(path))
    text = path.read_text(encoding="utf-8-sig")
    return parse_ohlcv(text, symbol if symbol is not None else path.stem)


def to_csv(series: PriceSeries) -> str:
    out = io.StringIO()
    out.write(",".join(HEADER) + "\n")
    for c in series.candles():
        out.write(f"{c.date.isoformat()},{c.open!r},{c.high!r},{c.low!r},{c.close!r},{c.volume!r}\n")
    return out.getvalue()


def save_ohlcv(series: PriceSeries, path) -> None:
    Path(path).write_text(to_csv(series), encoding="utf-8", newline="")


def _as_date(value) -> np.datetime64:
    if isinstance(value, str):
        value = _parse_date(value)
    return np.datetime64(value, "D")


def slice_period(series: PriceSeries, start, end) -> PriceSeries:
    """Bars with ``start <= date <= end`` (both ends inclusive)."""
    start, end = _as_date(start), _as_date(end)
    if start > end:
        raise InvalidRange(f"start {start} is after end {end}")
    mask = (series.dates >= start) & (series.dates <= end)
    return series.take(mask)


def validate_series(series: PriceSeries, min_len: int = MIN_LEN_BACKTEST) -> ValidatedSeries:
    """Apply the admissibility screens or raise :class:`SeriesRejected`."""
    n = len(series)
    if n == 0:
        raise SeriesRejected("Empty", symbol=series.symbol)
    if n < min_len:
        raise SeriesRejected("TooShort", (n, min_len), symbol=series.symbol)
    zero = np.flatnonzero(series.close == 0.0)
    if zero.size:
        raise SeriesRejected("ZeroClose", series.dates[zero[0]].astype(dt.date), symbol=series.symbol)
    if isinstance(series, ValidatedSeries):
        return series
    return ValidatedSeries(series.symbol, series.dates, series.open, series.high, series.low,
                           series.close, series.volume)


def pct_change(closes) -> np.ndarray:
    """``(c[i] - c[i-1]) / c[i-1] * 100`` for i >= 1."""
    closes = np.asarray(closes, dtype=np.float64)
    prev = closes[:-1]
    if np.any(prev == 0.0):
        raise ZeroClose("zero close in denominator")
    return (closes[1:] - prev) / prev * 100.0


def daily_returns(series: PriceSeries) -> ReturnSeries:
    if len(series) < 2:
        raise TooShort(f"need at least 2 candles, got {len(series)}")
    return ReturnSeries(series.symbol, series.dates[1:], pct_change(series.close))


def _describe(exc: SeriesRejected) -> str:
    d = exc.detail
    if d is None:
        return exc.reason
    text = ", ".join(str(x) for x in d) if isinstance(d, tuple) else str(d)
    return f"{exc.reason}({text})"


def load_universe(directory, min_len: int = MIN_LEN_BACKTEST, period=None) -> UniverseLoad:
    """Load every ``*.csv`` in ``directory`` (sorted by file name) and screen it.

    ``period`` is an optional ``(start, end)`` pair applied before validation.
    Unreadable files are recorded as rejections rather than aborting the run.
    """
    directory = Path(directory)
    if not directory.is_dir():
        raise MissingFile(str(directory))
    files = sorted(p for p in directory.iterdir() if p.suffix.lower() == ".csv")
    result = UniverseLoad(attempted=len(files))
    for path in files:
        try:
            series = load_ohlcv(path)
            if period is not None:
                series = slice_period(series, *period)
            result.series.append(validate_series(series, min_len))
        except SeriesRejected as exc:
            result.rejections[path.stem] = _describe(exc)
        except (MalformedRow, DuplicateDate) as exc:
            result.rejections[path.stem] = f"{type(exc).__name__}({exc})"
    return result

