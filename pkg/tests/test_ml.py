import warnings

import numpy as np
import pytest
from hypothesis import given, strategies as st

from cryptoeff.errors import (EmptyGrid, EmptyTestSet, EmptyUniverse, SingleClassTraining,
                              TooFewRows, TooShort)
from cryptoeff.ml import features as F
from cryptoeff.ml import selection as S
from cryptoeff.ml import svm
from cryptoeff.rng import substream

from conftest import cycle_bars, gbm_bars
from oracles import brute_force_dual


def blobs(seed, n=40, sep=4.0, dim=2):
    g = substream(seed, "blobs")
    X = np.vstack([g.standard_normal((n, dim)) - sep / 2, g.standard_normal((n, dim)) + sep / 2])
    y = np.r_[np.ones(n), -np.ones(n)]
    return X, y


# ---------------------------------------------------------------- SMO

@given(seed=st.integers(0, 10_000), n=st.integers(3, 8), C=st.sampled_from([0.5, 1.0, 10.0]),
       gamma=st.sampled_from([0.1, 1.0]))
def test_smo_matches_brute_force_dual(seed, n, C, gamma):
    g = substream(seed, "tiny")
    X = g.standard_normal((n, 2))
    y = np.where(g.random(n) < 0.5, 1.0, -1.0)
    y[0], y[1] = 1.0, -1.0
    K = svm.rbf(X, X, gamma)
    m = svm.solve_binary(X, y, C, gamma)
    assert m.converged
    assert np.all(m.alpha >= 0) and np.all(m.alpha <= C)
    assert abs(m.alpha @ y) < 1e-10
    best, _ = brute_force_dual(K, y, C)
    assert svm.dual_objective(m.alpha, y, K) == pytest.approx(best, abs=1e-6)
    assert svm.kkt_violation(m.alpha, y, K, m.rho, C) < 1e-3


def test_six_point_dual():
    X = np.array([[0, 0], [1, 0], [0, 1], [2, 2], [3, 2], [2, 3]], float)
    y = np.array([-1, -1, -1, 1, 1, 1], float)
    K = svm.rbf(X, X, 0.5)
    m = svm.solve_binary(X, y, 1.0, 0.5)
    best, _ = brute_force_dual(K, y, 1.0)
    assert svm.dual_objective(m.alpha, y, K) == pytest.approx(best, abs=1e-6)


def test_kkt_on_blobs():
    X, y = blobs(1, sep=1.0)
    for C in (0.1, 1.0, 100.0):
        m = svm.solve_binary(X, y, C, 0.5)
        K = svm.rbf(X, X, 0.5)
        assert m.converged
        assert svm.kkt_violation(m.alpha, y, K, m.rho, C) < 1e-3


def test_separable_blobs_fit_perfectly():
    X, y = blobs(2)
    model = svm.train_svm(X, y.astype(int), 1000.0, 0.1)
    assert np.mean(model.predict(X) == y) == 1.0
    assert model.converged and len(model.machines) == 1


def test_duplication_invariance():
    X, y = blobs(3)
    grid = substream(3, "grid").uniform(-4, 4, (400, 2))
    a = svm.train_svm(X, y.astype(int), 1e4, 0.1)
    b = svm.train_svm(np.vstack([X, X]), np.r_[y, y].astype(int), 1e4, 0.1)
    np.testing.assert_array_equal(a.predict(grid), b.predict(grid))


def test_shuffle_sensitivity_bounded():
    g = substream(4, "shuffle")
    X = g.standard_normal((150, 4))
    y = np.digitize(X[:, 0] + 0.5 * X[:, 1] + 0.3 * g.standard_normal(150), [-0.5, 0.5]) - 1
    test = g.standard_normal((500, 4))
    perm = g.permutation(150)
    a = svm.train_svm(X, y, 10.0, 0.1).predict(test)
    b = svm.train_svm(X[perm], y[perm], 10.0, 0.1).predict(test)
    assert np.mean(a != b) <= 0.01


def test_three_classes_one_vs_one():
    X, _ = blobs(5, n=20)
    X = np.vstack([X, substream(5, "c").standard_normal((20, 2)) + [6, -6]])
    y = np.repeat([-1, 1, 0], 20)
    model = svm.train_svm(X, y, 100.0, 0.5)
    assert set(model.machines) == {(-1, 0), (-1, 1), (0, 1)}
    assert np.mean(model.predict(X) == y) == 1.0


def test_vote_tie_goes_to_zero():
    class Fixed:
        def __init__(self, v):
            self.v = v

        def decision(self, X):
            return np.full(len(X), self.v)

    ident = svm.Scaler(np.zeros(1), np.ones(1))
    # -1 beats 0, 0 beats 1, 1 beats -1: a three-way tie
    m = svm.SvmModel(1.0, 1.0, ident, (-1, 0, 1),
                     {(-1, 0): Fixed(1.0), (-1, 1): Fixed(-1.0), (0, 1): Fixed(1.0)})
    assert m.predict(np.zeros((3, 1))).tolist() == [0, 0, 0]


def test_train_svm_errors():
    with pytest.raises(SingleClassTraining):
        svm.train_svm(np.zeros((5, 2)), np.ones(5, int), 1.0, 1.0)
    with pytest.raises(ValueError):
        svm.train_svm(np.zeros((2, 2)), np.array([0, 1]), 0.0, 1.0)


def test_budget_exhaustion_warns():
    X, y = blobs(6, sep=0.0)
    with pytest.warns(svm.ConvergenceWarning):
        m = svm.train_svm(X, y.astype(int), 1e6, 1.0, max_passes=1)
    assert not m.converged


def test_scaler_guard():
    X = substream(7, "sc").normal(5.0, 3.0, (50, 3))
    sc = svm.Scaler.fit(X)
    once = sc.transform(X)
    np.testing.assert_allclose(once.mean(axis=0), 0.0, atol=1e-12)
    np.testing.assert_allclose(once.std(axis=0), 1.0, atol=1e-12)
    assert not np.allclose(sc.transform(once), once)
    const = svm.Scaler.fit(np.ones((4, 2)))
    assert const.scale.tolist() == [1.0, 1.0]


# ---------------------------------------------------------------- features

def test_feature_row_count_exact():
    s = gbm_bars(1, n=300)
    n = 14
    ds = F.build_features(s, n)
    assert len(ds) == len(s) - 2 * n - 1
    assert ds.split_index == int(0.8 * len(ds))
    assert ds.X.shape == (len(ds), 12 + n - 1)
    assert ds.feature_names[:3] == ("Open", "RSI", "SMA") and ds.feature_names[-1] == "r13"
    vol = s.volume.copy()
    vol[[50, 120, 200]] = 0.0
    ds0 = F.build_features(type(s)(s.symbol, s.dates, s.open, s.high, s.low, s.close, vol), n)
    assert len(ds0) == len(s) - 3 - 2 * n - 1


def test_feature_values_are_causal():
    s = gbm_bars(2, n=200)
    n = 10
    ds = F.build_features(s, n)
    # map the dataset row back to its bar
    i = int(np.flatnonzero(s.dates == ds.dates[100])[0])
    x = dict(zip(ds.feature_names, ds.X[100]))
    assert x["Open"] == s.open[i]
    assert x["PC"] == s.close[i - 1] and x["PH"] == s.high[i - 1] and x["PL"] == s.low[i - 1]
    assert x["O-0"] == s.open[i] - s.open[i - 1]
    assert x["O-C"] == s.open[i] - s.close[i - 2]
    assert x["SMA"] == pytest.approx(np.mean(s.close[i - n:i]), rel=1e-12)
    assert ds.ret[100] == (s.open[i + 1] - s.open[i]) / s.open[i]
    assert x["r1"] == (s.open[i] - s.open[i - 1]) / s.open[i - 1]


def test_no_leakage_from_test_rows():
    s = gbm_bars(3, n=300)
    ds = F.build_features(s, 14)
    cut = len(s) - 20  # bars well inside the test split
    close = s.close.copy()
    close[cut:] *= 3.0
    opens = s.open.copy()
    opens[cut + 1:] *= 3.0
    s2 = type(s)(s.symbol, s.dates, opens, np.maximum(s.high, np.maximum(opens, close)),
                 np.minimum(s.low, np.minimum(opens, close)), close, s.volume)
    ds2 = F.build_features(s2, 14)
    sp = ds.split_index
    assert ds2.split_index == sp
    np.testing.assert_array_equal(ds.train[0], ds2.train[0])
    np.testing.assert_array_equal(ds.train[1], ds2.train[1])
    assert ds.thresholds == ds2.thresholds
    q = np.quantile(ds.ret[:sp], [0.34, 0.66])
    assert ds.thresholds == (q[0], q[1])
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        model = svm.train_svm(*ds.train, 10.0, 0.01)
    np.testing.assert_array_equal(model.scaler.mean, ds.train[0].mean(axis=0))


def test_tercile_labels_by_hand():
    ret = np.array([-3, -2, -1, 0, 1, 2, 3, 10, -10], float)
    labels, (lo, hi) = F.tercile_labels(ret, 7)
    # sorted train: -3..3, positions 0.34*6 = 2.04 and 0.66*6 = 3.96
    assert lo == pytest.approx(-1 + 0.04) and hi == pytest.approx(0 + 0.96)
    assert labels.tolist() == [-1, -1, -1, 0, 1, 1, 1, 1, -1]


def test_constant_target_all_zero():
    labels, (lo, hi) = F.tercile_labels(np.zeros(30), 24)
    assert lo == hi == 0.0 and not labels.any()


def test_alternating_moves_under_strict_terciles():
    # two-valued target: q34 sits on the low value and q66 on the high one,
    # so strict comparisons put every row in the middle class
    ret = np.resize([0.01, -0.01], 100)
    labels, (lo, hi) = F.tercile_labels(ret, 80)
    assert (lo, hi) == (-0.01, 0.01)
    assert not labels.any()


def test_too_short():
    with pytest.raises(TooShort):
        F.build_features(gbm_bars(4, n=60), 14)


# ---------------------------------------------------------------- selection

def test_splits_arithmetic():
    assert S.time_series_splits(90) == [(30, 30, 60), (60, 60, 90)]
    assert S.time_series_splits(100) == [(34, 34, 67), (67, 67, 100)]
    with pytest.raises(TooFewRows):
        S.time_series_splits(2)


def test_search_single_pair_and_determinism():
    X = substream(8, "x").standard_normal((60, 3))
    y = np.resize([-1, 0, 1], 60)
    assert S.hyperparam_search(X, y, [5.0], [0.3], 1, 0) == (5.0, 0.3)
    a = S.hyperparam_search(X, y, S.C_GRID[:2], S.GAMMA_GRID, 4, substream(1, "s"))
    b = S.hyperparam_search(X, y, S.C_GRID[:2], S.GAMMA_GRID, 4, substream(1, "s"))
    assert a == b
    with pytest.raises(EmptyGrid):
        S.hyperparam_search(X, y, [], [1.0], 1, 0)


def test_search_finds_the_only_good_gamma():
    X, y = np.zeros((30, 1)), np.zeros(30)
    seen = []

    def scorer(X, y, C, g):
        seen.append((C, g))
        return 1.0 if g == 1e-2 else 0.0

    full = len(S.C_GRID) * len(S.GAMMA_GRID)
    assert S.hyperparam_search(X, y, n_samples=full, rng=3, score_fn=scorer) == (10.0, 1e-2)
    assert len(seen) == full and len(set(seen)) == full
    for seed in range(20):
        seen.clear()
        C, g = S.hyperparam_search(X, y, rng=seed, score_fn=scorer)
        if any(p[1] == 1e-2 for p in seen):
            assert g == 1e-2
            assert (C, g) == next(p for p in seen if p[1] == 1e-2)


def test_confusion_cases():
    y = np.resize([-1, 0, 1], 300)
    perfect = S.confusion_matrix(y, y)
    assert perfect.accuracy == 1.0 and np.array_equal(perfect.counts, np.diag([100] * 3))
    const = S.confusion_matrix(y, np.zeros(300))
    assert const.accuracy == pytest.approx(1 / 3)
    anti = S.confusion_matrix(y, -y)
    d = np.diag(anti.counts)
    assert d[0] == 0 and d[2] == 0 and d[1] == 100
    assert anti.counts.sum(axis=1).tolist() == [100, 100, 100]
    with pytest.raises(EmptyTestSet):
        S.confusion_matrix([], [])


@given(st.lists(st.tuples(st.sampled_from([-1, 0, 1]), st.sampled_from([-1, 0, 1])), min_size=1))
def test_confusion_row_sums(pairs):
    t, p = map(np.array, zip(*pairs))
    cm = S.confusion_matrix(t, p)
    assert cm.total == len(t)
    for k, lab in enumerate((-1, 0, 1)):
        assert cm.counts[k].sum() == np.sum(t == lab)
    assert 0.0 <= cm.accuracy <= 1.0


def test_learnable_fixture():
    rep = S.average_accuracy([cycle_bars()], 5, seed=42, C_grid=(100.0,), gamma_grid=(0.01, 0.1),
                             n_samples=2)
    assert rep.percent >= 90


def test_average_accuracy_skips_and_empty():
    short = gbm_bars(9, n=40)
    rep = S.average_accuracy([cycle_bars(), short], 5, C_grid=(100.0,), gamma_grid=(0.1,), n_samples=1)
    assert list(rep.skipped) == [short.symbol] and len(rep.assets) == 1
    with pytest.raises(EmptyUniverse):
        S.average_accuracy([short], 5)


def test_strategy_returns():
    ds = F.build_features(cycle_bars(), 5)
    pred = ds.test[1]
    r = S.strategy_returns(ds, pred)
    np.testing.assert_array_equal(r, ds.ret[ds.split_index:] * pred)
