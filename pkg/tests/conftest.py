import os
from pathlib import Path

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from cryptoeff.market_data import PriceSeries

FIXTURES = Path(__file__).parent / "fixtures"
GOLDEN = Path(__file__).parent / "golden"

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("acceptance", deadline=None, max_examples=1000,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


def bars(opens_path, symbol="X", start="2021-01-01", wick=0.005, volume=1.0):
    """Bars with open_t = path_t and close_t = path_{t+1}."""
    p = np.asarray(opens_path, dtype=np.float64)
    o, c = p[:-1], p[1:]
    h = np.maximum(o, c) * (1 + wick)
    lo = np.minimum(o, c) * (1 - wick)
    dates = np.datetime64(start) + np.arange(len(o))
    return PriceSeries(symbol, dates, o, h, lo, c, np.full(len(o), volume))


def gbm_bars(seed, n=366, sigma=0.6, symbol=None):
    from cryptoeff.stochastic import GbmParams, simulate_gbm
    path = simulate_gbm(GbmParams(100.0, 0.0, sigma), 1 / 365, n, seed=seed)[0]
    return bars(path, symbol or f"N{seed}")


def cycle_bars(n=366, symbol="CYCLE"):
    r = np.resize([0.02, 0.0, -0.02], n)
    return bars(100 * np.cumprod(np.r_[1.0, 1 + r]), symbol)


@pytest.fixture(scope="session")
def universe_dir():
    return FIXTURES / "universe"


# ---------------------------------------------------------------- acceptance summary

_CRITERIA = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    if rep.when == "call":
        item.rep_call_failed = rep.failed
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    number, title = mark.args
    ok = rep.passed if rep.when == "call" else not rep.failed
    prev = _CRITERIA.get(number, (title, True))
    _CRITERIA[number] = (title, prev[1] and ok)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        title, ok = _CRITERIA[number]
        terminalreporter.write_line(f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {title}")
