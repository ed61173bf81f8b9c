"""Feature engineering and tercile labels for the next-day classifier.

Every indicator is computed on prices lagged by one day, so row ``t`` only
sees information available before the open of day ``t`` (plus the open
itself). The target is the next open-to-open change.
"""
from __future__ import annotations

import io
from dataclasses import dataclass

import numpy as np

from .. import indicators as ind
from ..errors import TooShort
from ..market_data import PriceSeries

MIN_ROWS = 50
TRAIN_SHARE = 0.8
Q_LOW, Q_HIGH = 0.34, 0.66
LABELS = (-1, 0, 1)


@dataclass(frozen=True)
class FeatureDataset:
    symbol: str
    feature_names: tuple
    dates: np.ndarray
    X: np.ndarray  # (rows, features)
    ret: np.ndarray  # next-day open-to-open change (fraction)
    labels: np.ndarray  # int8 in {-1, 0, +1}
    split_index: int
    thresholds: tuple = (np.nan, np.nan)  # (q34, q66) of the training Ret

    def __len__(self) -> int:
        return len(self.labels)

    @property
    def train(self):
        return self.X[:self.split_index], self.labels[:self.split_index]

    @property
    def test(self):
        return self.X[self.split_index:], self.labels[self.split_index:]

    def to_csv(self) -> str:
        out = io.StringIO()
        out.write(",".join(("date",) + self.feature_names + ("Ret", "Signal", "split")) + "\n")
        for i in range(len(self)):
            vals = ",".join(repr(v) for v in self.X[i].tolist())
            part = "train" if i < self.split_index else "test"
            out.write(f"{self.dates[i]},{vals},{self.ret[i]!r},{int(self.labels[i])},{part}\n")
        return out.getvalue()


def feature_names(n: int) -> tuple:
    return (("Open", "RSI", "SMA", "Corr", "SAR", "ADX", "ATR", "PH", "PL", "PC", "O-0", "O-C")
            + tuple(f"r{i}" for i in range(1, n)))


def _on_lagged(fn, *arrays, **kw) -> np.ndarray:
    """Apply ``fn`` to the series shifted by one day (first value undefined)."""
    out = np.full(len(arrays[0]), np.nan)
    out[1:] = fn(*(a[:-1] for a in arrays), **kw)
    return out


def tercile_labels(ret, split: int):
    """Label +1 above the training 66th percentile, -1 below the 34th, else 0.

    Quantiles use linear interpolation on ``ret[:split]``; comparisons are
    strict, so a constant target labels everything 0.
    """
    ret = np.asarray(ret, dtype=np.float64)
    if split < 1:
        raise TooShort("empty training split")
    q_lo, q_hi = np.quantile(ret[:split], [Q_LOW, Q_HIGH])
    labels = np.zeros(len(ret), dtype=np.int8)
    labels[ret > q_hi] = 1
    labels[ret < q_lo] = -1
    return labels, (float(q_lo), float(q_hi))


def build_features(series: PriceSeries, n: int, min_rows: int = MIN_ROWS) -> FeatureDataset:
    """Engineered feature matrix, target and labels for one asset.

    Zero-volume days are removed first, rows with any undefined value are
    dropped, and the first ``floor(0.8 * rows)`` rows form the training split.
    """
    if n < 2:
        raise ValueError("indicator window must be >= 2")
    s = series.take(series.volume != 0)
    o, h, lo, c = s.open, s.high, s.low, s.close
    if len(c) <= 2 * n + 1:
        raise TooShort(f"{s.symbol}: {len(c)} bars are too few for window {n}")

    rsi = _on_lagged(ind.rsi, c, n=n)
    sma = ind.sma(c, n, lagged=True)
    corr = ind.rolling_corr(ind.lag(c), ind.lag(sma), n)
    sar = _on_lagged(ind.parabolic_sar, h, lo, accel_init=0.2, accel_max=0.2)
    adx = _on_lagged(ind.adx, h, lo, c, n=n)
    atr = _on_lagged(ind.atr, h, lo, c, n=n)
    pc = ind.lag(c)
    o0 = o - ind.lag(o)
    # previous close shifted once more: the close two days back
    oc = o - ind.lag(pc)
    with np.errstate(invalid="ignore", divide="ignore"):
        ret = (ind.lag(o, -1) - o) / o
    cols = [o, rsi, sma, corr, sar, adx, atr, ind.lag(h), ind.lag(lo), pc, o0, oc]
    cols += [ind.lag(ret, i) for i in range(1, n)]
    X = np.column_stack(cols)

    keep = np.isfinite(X).all(axis=1) & np.isfinite(ret)
    X, ret, dates = X[keep], ret[keep], s.dates[keep]
    rows = len(ret)
    if rows < min_rows:
        raise TooShort(f"{s.symbol}: {rows} usable rows, need {min_rows}")
    split = int(TRAIN_SHARE * rows)
    labels, thresholds = tercile_labels(ret, split)
    return FeatureDataset(s.symbol, feature_names(n), dates, np.ascontiguousarray(X), ret,
                          labels, split, thresholds)
