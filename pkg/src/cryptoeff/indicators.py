"""Technical indicators used as strategy rules and classifier features.

All functions take 1-D price sequences and return float64 arrays aligned to
the input, with NaN marking the warm-up region. Smoothed indicators follow
Wilder's recursions.
"""
from __future__ import annotations

import io
from dataclasses import dataclass, field

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from . import kernels
from .errors import LengthMismatch, WindowTooLarge


@dataclass(frozen=True)
class IndicatorSeries:
    """Named indicator values aligned to a date index (NaN = undefined)."""

    name: str
    dates: np.ndarray
    values: np.ndarray
    params: dict = field(default_factory=dict)

    def to_csv(self) -> str:
        out = io.StringIO()
        out.write("date,value\n")
        for d, v in zip(np.asarray(self.dates, dtype="datetime64[D]").astype(str), self.values.tolist()):
            out.write(f"{d},{'' if np.isnan(v) else repr(v)}\n")
        return out.getvalue()


def _arr(x) -> np.ndarray:
    return np.ascontiguousarray(x, dtype=np.float64)


def _same_length(*arrays):
    n = len(arrays[0])
    if any(len(a) != n for a in arrays[1:]):
        raise LengthMismatch(f"lengths differ: {[len(a) for a in arrays]}")


def _check_window(n: int, length: int, minimum: int = 1):
    if n < minimum:
        raise ValueError(f"window must be >= {minimum}, got {n}")
    if n > length:
        raise WindowTooLarge(f"window {n} exceeds series length {length}")


def lag(x, k: int = 1) -> np.ndarray:
    """Shift forward by ``k`` positions, filling with NaN (pandas ``shift(k)``)."""
    x = _arr(x)
    out = np.full_like(x, np.nan)
    if k == 0:
        return x.copy()
    if abs(k) >= len(x):
        return out
    if k > 0:
        out[k:] = x[:-k]
    else:
        out[:k] = x[-k:]
    return out


def rolling_mean(x, n: int) -> np.ndarray:
    x = _arr(x)
    out = np.full(len(x), np.nan)
    if n <= len(x):
        out[n - 1:] = sliding_window_view(x, n).mean(axis=1)
    return out


def rolling_std(x, n: int, ddof: int = 0) -> np.ndarray:
    x = _arr(x)
    out = np.full(len(x), np.nan)
    if n <= len(x):
        out[n - 1:] = sliding_window_view(x, n).std(axis=1, ddof=ddof)
    return out


def sma(closes, n: int, lagged: bool = False) -> np.ndarray:
    """Simple moving average over the ``n`` most recent values.

    With ``lagged=True`` the input is shifted by one day first, so the value
    at ``t`` only uses closes up to ``t - 1``. NaN inputs propagate.
    """
    closes = _arr(closes)
    _check_window(n, len(closes))
    if lagged:
        return rolling_mean(lag(closes), n)
    return rolling_mean(closes, n)


def rsi(closes, n: int = 14) -> np.ndarray:
    """Wilder RSI. All-gain windows give 100, flat windows give 50."""
    closes = _arr(closes)
    if n < 1:
        raise ValueError("window must be >= 1")
    if len(closes) <= n:
        raise WindowTooLarge(f"RSI needs more than {n} closes, got {len(closes)}")
    return kernels.rsi_kernel(closes, n)


def parabolic_sar(highs, lows, accel_init: float = 0.2, accel_max: float = 0.2,
                  closes=None) -> np.ndarray:
    """Wilder's parabolic SAR.

    The first trend is long when the second close is at or above the first
    one. Without closes, bar midpoints ``(high + low) / 2`` stand in.
    """
    highs, lows = _arr(highs), _arr(lows)
    _same_length(highs, lows)
    if closes is not None:
        closes = _arr(closes)
        _same_length(highs, closes)
    if len(highs) < 2:
        raise WindowTooLarge("SAR needs at least 2 bars")
    if not 0 < accel_init <= accel_max:
        raise ValueError("need 0 < accel_init <= accel_max")
    if closes is not None:
        start_long = closes[1] >= closes[0]
    else:
        start_long = highs[1] + lows[1] >= highs[0] + lows[0]
    return kernels.sar_kernel(highs, lows, bool(start_long), float(accel_init), float(accel_max))


def atr(highs, lows, closes, n: int = 14) -> np.ndarray:
    highs, lows, closes = _arr(highs), _arr(lows), _arr(closes)
    _same_length(highs, lows, closes)
    if n < 1:
        raise ValueError("window must be >= 1")
    if len(highs) <= n:
        raise WindowTooLarge(f"ATR needs more than {n} bars")
    return kernels.wilder_average(kernels.true_range(highs, lows, closes), n, 1)


def adx(highs, lows, closes, n: int = 14) -> np.ndarray:
    highs, lows, closes = _arr(highs), _arr(lows), _arr(closes)
    _same_length(highs, lows, closes)
    if n < 1:
        raise ValueError("window must be >= 1")
    if len(highs) <= 2 * n:
        raise WindowTooLarge(f"ADX needs more than {2 * n} bars")
    return kernels.adx_kernel(highs, lows, closes, n)


def bbands(closes, n: int = 20, k: float = 2.0):
    """Return ``(upper, middle, lower)`` with a population-std band."""
    closes = _arr(closes)
    _check_window(n, len(closes), minimum=2)
    middle = rolling_mean(closes, n)
    width = k * rolling_std(closes, n, ddof=0)
    return middle + width, middle, middle - width


def rolling_corr(a, b, n: int) -> np.ndarray:
    """Trailing-window Pearson correlation, clamped to [-1, 1].

    Windows containing NaN or with zero variance in either input are NaN.
    """
    a, b = _arr(a), _arr(b)
    _same_length(a, b)
    _check_window(n, len(a), minimum=2)
    out = np.full(len(a), np.nan)
    wa = sliding_window_view(a, n)
    wb = sliding_window_view(b, n)
    da = wa - wa.mean(axis=1, keepdims=True)
    db = wb - wb.mean(axis=1, keepdims=True)
    saa = (da * da).sum(axis=1)
    sbb = (db * db).sum(axis=1)
    sab = (da * db).sum(axis=1)
    with np.errstate(invalid="ignore", divide="ignore"):
        r = sab / np.sqrt(saa * sbb)
    # relative test: exact-zero checks miss rounding residue of constant windows
    scale_a = np.abs(wa).max(axis=1)
    scale_b = np.abs(wb).max(axis=1)
    flat = (saa <= (1e-14 * scale_a) ** 2 * n) | (sbb <= (1e-14 * scale_b) ** 2 * n)
    r[flat] = np.nan
    out[n - 1:] = np.clip(r, -1.0, 1.0)
    return out
