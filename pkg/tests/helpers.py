"""Assertions shared by the Monte Carlo tests."""

import numpy as np


def empirical(values):
    """Sample mean and its standard error."""
    values = np.asarray(values, dtype=np.float64)
    return float(values.mean()), float(values.std(ddof=1) / np.sqrt(values.size))


def assert_within(value, expected, stderr, limit=4.0):
    """Assert ``value`` lies within ``limit`` standard errors of ``expected``."""
    assert stderr > 0
    z = (value - expected) / stderr
    assert abs(z) <= limit, f"{value} vs {expected}: z={z:.2f}"


def assert_mean_within(values, expected, limit=4.0):
    mean, stderr = empirical(values)
    assert_within(mean, expected, stderr, limit)
