"""Empirical tests of crypto market efficiency: backtests, unit roots,
forecasting, classification, price-process simulation and sentiment replay."""

__version__ = "0.1.0"
