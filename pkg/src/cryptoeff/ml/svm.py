"""RBF support-vector classification trained by SMO, one-vs-one for 3 classes.

The binary dual is

    min_a  0.5 a'Qa - sum(a)   s.t.  0 <= a_i <= C,  y'a = 0,  Q_ij = y_i y_j K(x_i, x_j)

solved with second-order working-set selection. The decision function is
``f(x) = sum_i a_i y_i K(x_i, x) - rho``.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from .. import kernels
from ..errors import ConvergenceWarning, SingleClassTraining

KKT_TOL = 1e-3
# SMO stops on a maximal-violating-pair gap 100x tighter than the KKT bound
# it must meet; the dual objective is then within ~1e-9 of the optimum
STOP_EPS = 1e-5
MAX_PASSES = 10_000


@dataclass(frozen=True)
class Scaler:
    """Per-feature z-score; zero-variance features keep unit scale."""

    mean: np.ndarray
    scale: np.ndarray

    @classmethod
    def fit(cls, X) -> "Scaler":
        X = np.asarray(X, dtype=np.float64)
        std = X.std(axis=0)
        std[std == 0.0] = 1.0
        return cls(X.mean(axis=0), std)

    def transform(self, X) -> np.ndarray:
        return (np.asarray(X, dtype=np.float64) - self.mean) / self.scale


def rbf(A, B, gamma: float) -> np.ndarray:
    return kernels.rbf_kernel_matrix(np.ascontiguousarray(A, dtype=np.float64),
                                     np.ascontiguousarray(B, dtype=np.float64), float(gamma))


@dataclass(frozen=True)
class BinarySvm:
    """One solved dual. ``coef`` holds ``a_i y_i`` of the support vectors."""

    support: np.ndarray
    coef: np.ndarray
    rho: float
    gamma: float
    alpha: np.ndarray  # full dual vector, kept for diagnostics
    iterations: int
    converged: bool

    def decision(self, X) -> np.ndarray:
        if len(self.coef) == 0:
            return np.full(len(X), -self.rho)
        return rbf(X, self.support, self.gamma) @ self.coef - self.rho


def dual_objective(alpha, y, K) -> float:
    ay = np.asarray(alpha) * np.asarray(y)
    return float(0.5 * ay @ K @ ay - np.sum(alpha))


def kkt_violation(alpha, y, K, rho: float, C: float) -> float:
    """Largest violation of the box KKT conditions in terms of ``y_i f(x_i)``.

    ``a = 0`` needs ``y f >= 1``, ``a = C`` needs ``y f <= 1``, free
    multipliers need ``y f = 1``.
    """
    alpha = np.asarray(alpha, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    yf = y * (K @ (alpha * y) - rho)
    lower = alpha <= 0.0
    upper = alpha >= C
    free = ~(lower | upper)
    v = np.zeros(len(alpha))
    v[lower] = np.maximum(0.0, 1.0 - yf[lower])
    v[upper] = np.maximum(0.0, yf[upper] - 1.0)
    v[free] = np.abs(yf[free] - 1.0)
    return float(v.max()) if len(v) else 0.0


def solve_binary(X, y, C: float, gamma: float, tol: float = STOP_EPS,
                 max_passes: int = MAX_PASSES, K=None) -> BinarySvm:
    """Train one binary RBF SVM; ``y`` in {-1, +1}."""
    X = np.ascontiguousarray(X, dtype=np.float64)
    y = np.ascontiguousarray(y, dtype=np.float64)
    if K is None:
        K = rbf(X, X, gamma)
    n = len(y)
    alpha, rho, it, ok = kernels.smo_solve(K, y, float(C), float(tol), max_passes * max(n, 1))
    sv = alpha > 0.0
    return BinarySvm(X[sv].copy(), (alpha * y)[sv], float(rho), float(gamma), alpha, int(it), bool(ok))


@dataclass(frozen=True)
class SvmModel:
    C: float
    gamma: float
    scaler: Scaler
    classes: tuple
    machines: dict = field(default_factory=dict)  # (a, b) -> BinarySvm, +1 means a
    converged: bool = True

    def decision_votes(self, X) -> np.ndarray:
        Z = self.scaler.transform(X)
        votes = np.zeros((len(Z), len(self.classes)), dtype=np.int64)
        index = {c: k for k, c in enumerate(self.classes)}
        for (a, b), m in self.machines.items():
            wins_a = m.decision(Z) > 0
            votes[wins_a, index[a]] += 1
            votes[~wins_a, index[b]] += 1
        return votes

    def predict(self, X) -> np.ndarray:
        """Majority vote; ties go to class 0 when it is tied, else the lowest label."""
        votes = self.decision_votes(X)
        classes = np.asarray(self.classes)
        top = votes.max(axis=1, keepdims=True)
        tied = votes == top
        out = classes[np.argmax(tied, axis=1)].astype(np.int8)
        if 0 in self.classes:
            zero_tied = tied[:, self.classes.index(0)]
            out[zero_tied] = 0
        return out


def train_svm(X, y, C: float, gamma: float, tol: float = STOP_EPS, max_passes: int = MAX_PASSES) -> SvmModel:
    """Standardize on ``X`` and fit one binary machine per class pair."""
    if not C > 0 or not gamma > 0:
        raise ValueError("C and gamma must be > 0")
    y = np.asarray(y)
    classes = tuple(int(c) for c in np.unique(y))
    if len(classes) < 2:
        raise SingleClassTraining(f"training labels contain only {classes}")
    scaler = Scaler.fit(X)
    Z = scaler.transform(X)
    K_full = rbf(Z, Z, gamma)
    machines = {}
    ok = True
    for a, b in combinations(classes, 2):
        idx = np.flatnonzero((y == a) | (y == b))
        yb = np.where(y[idx] == a, 1.0, -1.0)
        m = solve_binary(Z[idx], yb, C, gamma, tol, max_passes, K=K_full[np.ix_(idx, idx)])
        machines[(a, b)] = m
        ok &= m.converged
    if not ok:
        warnings.warn(f"SMO hit its budget (C={C}, gamma={gamma}); using the best-so-far solution",
                      ConvergenceWarning, stacklevel=2)
    return SvmModel(float(C), float(gamma), scaler, classes, machines, ok)


class ConstantModel:
    """Predicts one label; stands in when a validation fold trains on one class."""

    def __init__(self, label: int):
        self.label = int(label)

    def predict(self, X) -> np.ndarray:
        return np.full(len(X), self.label, dtype=np.int8)
