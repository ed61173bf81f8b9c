"""Unit-root screening, return correlation and distribution diagnostics."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import (EmptyUniverse, InsufficientOverlap, SingularRegression,
                     TooShort, ZeroVariance)
from .market_data import PriceSeries, ReturnSeries

# MacKinnon (1994) response surface for the constant-only, single-series
# case: p = Phi(poly(tau)); quadratic below TAU_STAR, cubic above.
TAU_MIN_C = -18.83
TAU_MAX_C = 2.74
TAU_STAR_C = -1.61
TAU_C_SMALLP = (2.1659, 1.4412, 3.8269e-2)
TAU_C_LARGEP = (1.7339, 9.3202e-1, -1.2745e-1, -1.0368e-2)
P_FLOOR, P_CEIL = 0.001, 0.999

# MacKinnon (2010) critical values, constant only: coefficients of 1/T^0..1/T^3
CRIT_C = {"1%": (-3.43035, -6.5393, -16.786, -79.433),
          "5%": (-2.86154, -2.8903, -4.234, -40.040),
          "10%": (-2.56677, -1.5384, -2.809, 0.0)}

MIN_REGRESSION_OBS = 25


def norm_cdf(x: float) -> float:
    """Standard normal CDF via erfc (relative error < 1e-15, tails included)."""
    return 0.5 * math.erfc(-x / math.sqrt(2.0))


@dataclass(frozen=True)
class AdfResult:
    test_statistic: float
    p_value: float
    lags_used: int
    n_obs: int
    reject_at_5pct: bool
    critical_values: dict = field(default_factory=dict)
    p_clamped: bool = False
    aic: float = float("nan")


@dataclass(frozen=True)
class DistributionStats:
    n: int
    mean: float
    std: float
    skewness: float
    excess_kurtosis: float
    jarque_bera_stat: float
    jb_p_value: float
    hist_counts: np.ndarray = None
    hist_edges: np.ndarray = None


@dataclass(frozen=True)
class CorrelationResult:
    symbol_a: str
    symbol_b: str
    n_overlap: int
    pearson_r: float


def mackinnon_p(tau: float) -> tuple[float, bool]:
    """Approximate p-value for the constant-only DF statistic.

    Returns ``(p, clamped)``; statistics outside the tabulated range are not
    extrapolated but clamped to [0.001, 0.999] and flagged.
    """
    if tau > TAU_MAX_C:
        return P_CEIL, True
    if tau < TAU_MIN_C:
        return P_FLOOR, True
    coef = TAU_C_SMALLP if tau <= TAU_STAR_C else TAU_C_LARGEP
    z = sum(c * tau ** i for i, c in enumerate(coef))
    return norm_cdf(z), False


def mackinnon_crit(nobs: int) -> dict:
    return {k: sum(c / nobs ** i for i, c in enumerate(coef)) for k, coef in CRIT_C.items()}


def schwert_maxlag(n: int) -> int:
    return int(math.floor(12.0 * (n / 100.0) ** 0.25))


def _ols(X: np.ndarray, y: np.ndarray):
    """OLS returning (beta, ssr, cov). Raises on a rank-deficient design."""
    if np.linalg.matrix_rank(X) < X.shape[1]:
        raise SingularRegression("design matrix is rank deficient")
    beta, _, _, _ = np.linalg.lstsq(X, y, rcond=None)
    resid = y - X @ beta
    ssr = float(resid @ resid)
    dof = X.shape[0] - X.shape[1]
    xtx_inv = np.linalg.inv(X.T @ X)
    cov = ssr / dof * xtx_inv
    return beta, ssr, cov


def _adf_design(y: np.ndarray, lags: int, start: int):
    """Rows t = start..n-1 of dy_t on [y_{t-1}, 1, dy_{t-1}, ..., dy_{t-lags}].

    ``start`` indexes the differenced series ``dy`` (length n - 1).
    """
    dy = np.diff(y)
    rows = np.arange(start, len(dy))
    # centring the level column leaves its coefficient and t-ratio unchanged
    # (a constant is present) but keeps the design well conditioned
    lev = y[rows]
    cols = [lev - lev.mean(), np.ones(len(rows))]
    for i in range(1, lags + 1):
        cols.append(dy[rows - i])
    return np.column_stack(cols), dy[rows]


def _gaussian_aic(ssr: float, nobs: int, k: int) -> float:
    llf = -nobs / 2.0 * (math.log(2 * math.pi) + math.log(ssr / nobs) + 1.0)
    return -2.0 * llf + 2.0 * k


def adf_test(closes, max_lag: int | None = None, autolag: str | None = "AIC",
             log: bool = False) -> AdfResult:
    """Augmented Dickey-Fuller test with a constant and no trend.

    The lag order is chosen by AIC over ``0..max_lag`` on a common sample
    (``max_lag`` defaults to ``floor(12 * (n/100)^(1/4))``); the chosen model
    is then refitted on every usable observation. ``autolag=None`` uses
    ``max_lag`` directly.
    """
    y = np.asarray(closes, dtype=np.float64)
    if log:
        y = np.log(y)
    n = len(y)
    if max_lag is None:
        max_lag = schwert_maxlag(n)
    max_lag = max(0, min(max_lag, n // 2 - 2))
    if n - 1 - max_lag < MIN_REGRESSION_OBS:
        raise TooShort(f"{n} observations leave fewer than {MIN_REGRESSION_OBS} regression rows")
    if np.ptp(y) == 0.0:
        raise SingularRegression("constant series")

    best_aic = math.nan
    if autolag is None:
        lags = max_lag
    elif autolag.upper() == "AIC":
        best, lags = math.inf, 0
        for p in range(max_lag + 1):
            X, target = _adf_design(y, p, max_lag)
            try:
                _, ssr, _ = _ols(X, target)
            except SingularRegression:
                continue
            aic = _gaussian_aic(ssr, len(target), X.shape[1])
            if aic < best:
                best, lags = aic, p
        if not math.isfinite(best):
            raise SingularRegression("every candidate lag order is singular")
        best_aic = best
    else:
        raise ValueError(f"unknown autolag {autolag!r}")

    X, target = _adf_design(y, lags, lags)
    beta, _, cov = _ols(X, target)
    se = math.sqrt(cov[0, 0])
    if se == 0.0:
        raise SingularRegression("zero standard error on the level term")
    tau = float(beta[0] / se)
    p, clamped = mackinnon_p(tau)
    return AdfResult(test_statistic=tau, p_value=p, lags_used=lags, n_obs=len(target),
                     reject_at_5pct=p <= 0.05, critical_values=mackinnon_crit(len(target)),
                     p_clamped=clamped, aic=best_aic)


@dataclass
class RandomWalkScreen:
    share_pct: float
    results: dict  # symbol -> AdfResult
    skipped: dict  # symbol -> reason


def random_walk_share(universe: Sequence[PriceSeries], min_len: int = 100, log: bool = False) -> RandomWalkScreen:
    """Percent of admissible assets whose ADF p-value exceeds 0.05."""
    results, skipped = {}, {}
    for s in universe:
        if len(s) < min_len or np.any(s.close == 0.0):
            skipped[s.symbol] = "TooShort" if len(s) < min_len else "ZeroClose"
            continue
        try:
            results[s.symbol] = adf_test(s.close, log=log)
        except (SingularRegression, TooShort) as exc:
            skipped[s.symbol] = type(exc).__name__
    if not results:
        raise EmptyUniverse("no asset passed the ADF screens")
    n_random = sum(r.p_value > 0.05 for r in results.values())
    return RandomWalkScreen(n_random / len(results) * 100.0, results, skipped)


def pearson_corr(a: ReturnSeries, b: ReturnSeries) -> CorrelationResult:
    """Pearson r of two return series on their common dates (inner join)."""
    common, ia, ib = np.intersect1d(a.dates, b.dates, assume_unique=True, return_indices=True)
    if len(common) < 2:
        raise InsufficientOverlap(f"{len(common)} common dates")
    x = np.asarray(a.returns_pct, dtype=np.float64)[ia]
    y = np.asarray(b.returns_pct, dtype=np.float64)[ib]
    dx, dy = x - x.mean(), y - y.mean()
    sxx, syy = float(dx @ dx), float(dy @ dy)
    if sxx == 0.0 or syy == 0.0:
        raise ZeroVariance("a series is constant on the overlap")
    r = float(dx @ dy) / math.sqrt(sxx * syy)
    return CorrelationResult(a.symbol, b.symbol, len(common), min(1.0, max(-1.0, r)))


def distribution_stats(returns, bins: int = 80) -> DistributionStats:
    """Moment statistics (population conventions) and the Jarque-Bera test."""
    x = np.asarray(getattr(returns, "returns_pct", returns), dtype=np.float64)
    n = len(x)
    if n < 8:
        raise TooShort(f"need at least 8 returns, got {n}")
    mean = float(x.mean())
    d = x - mean
    m2 = float(np.mean(d ** 2))
    if m2 == 0.0:
        raise ZeroVariance("constant returns")
    m3 = float(np.mean(d ** 3))
    m4 = float(np.mean(d ** 4))
    g1 = m3 / m2 ** 1.5
    g2 = m4 / m2 ** 2 - 3.0
    jb = n / 6.0 * (g1 ** 2 + g2 ** 2 / 4.0)
    counts, edges = np.histogram(x, bins=bins)
    return DistributionStats(n, mean, math.sqrt(m2), g1, g2, jb, math.exp(-jb / 2.0), counts, edges)
