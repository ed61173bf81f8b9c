import hashlib
import os
import subprocess
import sys
import textwrap

import numpy as np
import pytest

from cryptoeff import _accel, kernels
from cryptoeff.ml import svm
from cryptoeff.rng import substream

from conftest import gbm_bars

needs_numba = pytest.mark.skipif(not _accel.HAS_NUMBA, reason="numba disabled or missing")


@pytest.fixture(scope="module")
def ohlc():
    s = gbm_bars(21, n=400)
    return s.high, s.low, s.close


@needs_numba
def test_indicator_kernels_match_fallback(ohlc):
    h, lo, c = ohlc
    np.testing.assert_array_equal(kernels.rsi_kernel(c, 14), kernels.rsi_kernel.py_func(c, 14))
    np.testing.assert_array_equal(kernels.true_range(h, lo, c), kernels.true_range.py_func(h, lo, c))
    for a, b in zip(kernels.adx_kernel(h, lo, c, 14), kernels.adx_kernel.py_func(h, lo, c, 14)):
        np.testing.assert_allclose(a, b, rtol=1e-13, equal_nan=True)
    for long in (True, False):
        np.testing.assert_array_equal(kernels.sar_kernel(h, lo, long, 0.02, 0.2),
                                      kernels.sar_kernel.py_func(h, lo, long, 0.02, 0.2))


@needs_numba
def test_smo_matches_fallback():
    g = substream(1, "accel-smo")
    X = g.standard_normal((60, 3))
    y = np.where(X[:, 0] + 0.3 * g.standard_normal(60) > 0, 1.0, -1.0)
    K = svm.rbf(X, X, 0.5)
    np.testing.assert_allclose(K, kernels.rbf_kernel_matrix.py_func(X, X, 0.5), rtol=1e-14)
    a1, r1, it1, ok1 = kernels.smo_solve(K, y, 10.0, 1e-5, 600_000)
    a2, r2, it2, ok2 = kernels.smo_solve.py_func(K, y, 10.0, 1e-5, 600_000)
    assert ok1 and ok2 and it1 == it2
    np.testing.assert_allclose(a1, a2, rtol=1e-10, atol=1e-12)
    assert r1 == pytest.approx(r2, rel=1e-10)


@needs_numba
def test_heston_twins_agree():
    g = substream(2, "accel-heston")
    z1, z2 = g.standard_normal((50, 200)), g.standard_normal((50, 200))
    args = (100.0, 0.04, 0.01, 1.0, 0.04, 0.9, -0.5, 1 / 252, z1, z2)
    ls1, v1, t1 = kernels._heston_paths_nb(*args)
    ls2, v2, t2 = kernels._heston_paths_np(*args)
    assert t1 == t2 > 0
    np.testing.assert_allclose(ls1, ls2, rtol=1e-12)
    np.testing.assert_allclose(v1, v2, rtol=1e-10, atol=1e-14)


SCRIPT = textwrap.dedent("""
    import hashlib, sys
    sys.path.insert(0, {tests!r})
    from conftest import gbm_bars
    from cryptoeff import _accel, indicators as ind
    s = gbm_bars(21, n=400)
    parts = [ind.rsi(s.close, 14), ind.adx(s.high, s.low, s.close, 14), ind.atr(s.high, s.low, s.close, 14),
             ind.parabolic_sar(s.high, s.low, closes=s.close)]
    print(_accel.HAS_NUMBA, hashlib.sha256(b"".join(p.round(10).tobytes() for p in parts)).hexdigest())
""")


def test_env_flag_switches_backend():
    tests = os.path.dirname(__file__)
    code = SCRIPT.format(tests=tests)
    outs = {}
    for flag in ("0", "1"):
        env = dict(os.environ, CRYPTOEFF_DISABLE_NUMBA=flag)
        res = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
        outs[flag] = res.stdout.split()
    assert outs["1"][0] == "False"
    assert outs["0"][1] == outs["1"][1]
