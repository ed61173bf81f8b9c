"""Next-day direction classifier: features, SVM and evaluation."""
from .features import FeatureDataset, build_features, feature_names, tercile_labels
from .selection import (AccuracyReport, ConfusionMatrix, average_accuracy, classify_asset,
                        confusion_matrix, cv_accuracy, evaluate, hyperparam_search,
                        strategy_returns, time_series_splits)
from .svm import Scaler, SvmModel, dual_objective, kkt_violation, solve_binary, train_svm

__all__ = [
    "AccuracyReport", "ConfusionMatrix", "FeatureDataset", "Scaler", "SvmModel",
    "average_accuracy", "build_features", "classify_asset", "confusion_matrix", "cv_accuracy",
    "dual_objective", "evaluate", "feature_names", "hyperparam_search", "kkt_violation",
    "solve_binary", "strategy_returns", "tercile_labels", "time_series_splits", "train_svm",
]
