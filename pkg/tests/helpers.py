"""Shared statistical assertion helpers for the Monte Carlo tests."""

import math


def variance_se(variance: float, n: int) -> float:
    """Standard error of the sample variance of n iid Gaussians."""
    return variance * math.sqrt(2.0 / (n - 1))


def covariance_se(var_a: float, var_b: float, cov: float, n: int) -> float:
    """Large-sample standard error of a Gaussian sample covariance."""
    return math.sqrt((var_a * var_b + cov * cov) / n)


def assert_within(actual: float, expected: float, se: float, k: float = 3.0, what: str = ""):
    delta = abs(actual - expected)
    assert delta <= k * se, (
        f"{what or 'statistic'}: {actual!r} deviates from {expected!r} by {delta:.4g} "
        f"> {k} x se = {k * se:.4g}"
    )
