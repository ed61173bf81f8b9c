"""Price-process simulators and closed-form valuation formulas.

Normal draws come from PCG64 substreams (numpy's ziggurat
``standard_normal``). Ensembles are generated in fixed-size chunks, chunk
``j`` drawing from ``substream(seed, "simulate", model, "chunk", j)``, so an
ensemble is reproducible and independent of how chunks are scheduled.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .econometrics import norm_cdf
from .errors import ArgumentCountError, DomainError, NonPositiveSpread
from .rng import substream

CHUNK = 4096


@dataclass(frozen=True)
class GbmParams:
    s0: float
    mu: float
    sigma: float

    def __post_init__(self):
        if not self.s0 > 0:
            raise DomainError("s0 must be > 0")
        if self.sigma < 0:
            raise DomainError("sigma must be >= 0")


@dataclass(frozen=True)
class HestonParams:
    s0: float
    v0: float
    r: float
    kappa: float
    theta: float
    sigma_v: float
    rho: float = 0.0

    def __post_init__(self):
        if not self.s0 > 0:
            raise DomainError("s0 must be > 0")
        for name in ("v0", "kappa", "theta", "sigma_v"):
            if getattr(self, name) < 0:
                raise DomainError(f"{name} must be >= 0")
        if not -1.0 <= self.rho <= 1.0:
            raise DomainError("rho must be within [-1, 1]")

    @property
    def feller_ratio(self) -> float:
        """``2 kappa theta / sigma_v^2``; below 1 the variance can reach zero."""
        if self.sigma_v == 0:
            return math.inf
        return 2.0 * self.kappa * self.theta / self.sigma_v ** 2


@dataclass(frozen=True)
class HestonPaths:
    prices: np.ndarray  # (paths, steps + 1)
    variances: np.ndarray  # pre-truncation variance, same shape
    floor_touches: int
    scheme: str = "euler-full-truncation"


@dataclass(frozen=True)
class OptionQuote:
    s: float
    k: float
    r: float
    t: float
    sigma: float
    call_price: float
    put_price: float


def _chunks(n_paths: int):
    for j, start in enumerate(range(0, n_paths, CHUNK)):
        yield j, min(CHUNK, n_paths - start)


def simulate_gbm(params: GbmParams, dt: float, steps: int, seed: int, paths: int = 1,
                 arithmetic: bool = False) -> np.ndarray:
    """Exact log-Euler GBM paths, shape ``(paths, steps + 1)`` including ``s0``.

    ``arithmetic=True`` gives Bachelier's additive model
    ``S_{t+1} = S_t + mu dt + sigma sqrt(dt) Z`` instead.
    """
    if not dt > 0:
        raise DomainError("dt must be > 0")
    if steps < 1 or paths < 1:
        raise DomainError("steps and paths must be >= 1")
    out = np.empty((paths, steps + 1))
    row = 0
    drift = (params.mu - 0.5 * params.sigma ** 2) * dt
    vol = params.sigma * math.sqrt(dt)
    for j, m in _chunks(paths):
        z = substream(seed, "simulate", "gbm", "chunk", j).standard_normal((m, steps))
        block = out[row:row + m]
        block[:, 0] = params.s0
        if arithmetic:
            block[:, 1:] = params.s0 + np.cumsum(params.mu * dt + vol * z, axis=1)
        else:
            block[:, 1:] = params.s0 * np.exp(np.cumsum(drift + vol * z, axis=1))
        row += m
    return out


def simulate_heston(params: HestonParams, dt: float, steps: int, seed: int, paths: int = 1) -> HestonPaths:
    """Euler full-truncation Heston paths.

    ``V+ = max(V, 0)`` enters both the variance drift and every square root;
    the stored variance is the untruncated state, and ``floor_touches``
    counts the steps that started at or below zero.
    """
    if not dt > 0:
        raise DomainError("dt must be > 0")
    if steps < 1 or paths < 1:
        raise DomainError("steps and paths must be >= 1")
    prices = np.empty((paths, steps + 1))
    variances = np.empty((paths, steps + 1))
    touches = 0
    row = 0
    for j, m in _chunks(paths):
        g = substream(seed, "simulate", "heston", "chunk", j)
        z1 = g.standard_normal((m, steps))
        z2 = g.standard_normal((m, steps))
        log_s, var, t = kernels.heston_paths(float(params.s0), float(params.v0), float(params.r),
                                             float(params.kappa), float(params.theta),
                                             float(params.sigma_v), float(params.rho), float(dt), z1, z2)
        prices[row:row + m] = np.exp(log_s)
        variances[row:row + m] = var
        touches += int(t)
        row += m
    return HestonPaths(prices, variances, touches)


def heston_driving_noise(seed: int, steps: int, rho: float = 0.0):
    """The correlated ``(W1, W2)`` increments (unit variance) used for path 0 of chunk 0."""
    g = substream(seed, "simulate", "heston", "chunk", 0)
    z1 = g.standard_normal((1, steps))[0]
    z2 = g.standard_normal((1, steps))[0]
    return z1, rho * z1 + math.sqrt(max(0.0, 1 - rho * rho)) * z2


def norm_pdf(x: float) -> float:
    return math.exp(-0.5 * x * x) / math.sqrt(2.0 * math.pi)


def _check_option_domain(s, k, t, sigma):
    if not s > 0 or not k > 0:
        raise DomainError("s and k must be > 0")
    if not t > 0:
        raise DomainError("t must be > 0")
    if sigma < 0:
        raise DomainError("sigma must be >= 0")


def _d1_d2(s, k, r, t, sigma):
    sq = sigma * math.sqrt(t)
    d1 = (math.log(s / k) + (r + 0.5 * sigma * sigma) * t) / sq
    return d1, d1 - sq


def black_scholes_call(s: float, k: float, r: float, t: float, sigma: float) -> OptionQuote:
    _check_option_domain(s, k, t, sigma)
    disc_k = k * math.exp(-r * t)
    if sigma == 0:
        call = max(s - disc_k, 0.0)
        put = max(disc_k - s, 0.0)
    else:
        d1, d2 = _d1_d2(s, k, r, t, sigma)
        call = s * norm_cdf(d1) - disc_k * norm_cdf(d2)
        put = disc_k * norm_cdf(-d2) - s * norm_cdf(-d1)
    return OptionQuote(s, k, r, t, sigma, call, put)


def black_scholes_vega(s: float, k: float, r: float, t: float, sigma: float) -> float:
    _check_option_domain(s, k, t, sigma)
    if sigma == 0:
        return 0.0
    d1, _ = _d1_d2(s, k, r, t, sigma)
    return s * norm_pdf(d1) * math.sqrt(t)


def gordon_shapiro(d1: float, k: float, g: float) -> float:
    """Present value of a dividend ``d1`` growing at ``g``, discounted at ``k``."""
    if k <= g:
        raise NonPositiveSpread(f"required return {k} must exceed growth {g}")
    return d1 / (k - g)


QTM_SYMBOLS = ("M", "V", "P", "Y")


def quantity_theory_solve(M=None, V=None, P=None, Y=None) -> dict:
    """Solve ``M V = P Y`` for the missing symbol.

    With all four supplied, returns ``{"consistent": bool}`` (relative
    tolerance 1e-12) instead.
    """
    given = {"M": M, "V": V, "P": P, "Y": Y}
    known = {k: v for k, v in given.items() if v is not None}
    for k, v in known.items():
        if not v > 0:
            raise DomainError(f"{k} must be > 0")
    if len(known) == 4:
        lhs, rhs = M * V, P * Y
        return {"consistent": math.isclose(lhs, rhs, rel_tol=1e-12), "MV": lhs, "PY": rhs}
    if len(known) != 3:
        raise ArgumentCountError(f"exactly three of M, V, P, Y are required, got {len(known)}")
    missing = next(k for k in QTM_SYMBOLS if k not in known)
    if missing == "M":
        value = P * Y / V
    elif missing == "V":
        value = P * Y / M
    elif missing == "P":
        value = M * V / Y
    else:
        value = M * V / P
    return {missing: value}
