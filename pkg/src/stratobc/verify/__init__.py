"""Run-verification analytics: drift statistics, percentage error, MSE."""

from stratobc.verify.stats import DriftStats, ErrorStats, drift_stats, mse, pct_error

__all__ = ["DriftStats", "ErrorStats", "drift_stats", "mse", "pct_error"]
