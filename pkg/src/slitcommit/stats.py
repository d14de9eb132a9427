"""Hypothesis tests and estimators used by the verifier and the Monte Carlo.

All decision rules (equal-probability binning, minlike two-sided binomial,
Wilson intervals, weighted log2 fits) are implemented here; scipy supplies
only distribution functions (chi-squared survival function, binomial pmf).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import stats as _sps

# Relative tolerance when comparing pmf values for the two-sided "minlike"
# binomial p-value (outcomes at least as unlikely as the observed one).
PMF_TIE_RTOL = 1e-7

MIN_TEST_BINS = 4
MIN_EXPECTED_PER_BIN = 5
DEFAULT_TEST_BINS = 32


class InsufficientSamplesError(ValueError):
    """Too few samples for a calibrated goodness-of-fit decision."""


@dataclass(frozen=True)
class GofResult:
    statistic: float
    p_value: float
    passed: bool
    n_bins: int
    n_samples: int


@dataclass(frozen=True)
class BalanceResult:
    p_value: float
    passed: bool
    n_left: int
    n_right: int


def equal_probability_edges(pdf, n_bins: int) -> np.ndarray:
    """The n_bins+1 screen positions splitting a tabulated pdf into equal-mass bins.

    Quantiles are taken on the piecewise-linear CDF (linear within grid bins),
    the same law the sampler draws from, so bin masses are exact.  The first
    and last edges are the window boundaries.
    """
    targets = np.arange(n_bins + 1) / n_bins
    cdf_knots = np.concatenate([[0.0], pdf.cdf])
    edges = np.interp(targets, cdf_knots, pdf.grid.edges)
    edges[0] = pdf.grid.edges[0]
    edges[-1] = pdf.grid.edges[-1]
    return edges


def chi_squared_gof(samples, pdf, n_test_bins: int = DEFAULT_TEST_BINS, alpha: float = 0.01) -> GofResult:
    """Pearson chi-squared GOF of positions against a tabulated screen pdf.

    Test bins are equal-probability intervals of the pdf.  The bin count is
    reduced from `n_test_bins` as needed so every bin keeps an expected count
    of at least MIN_EXPECTED_PER_BIN; below MIN_TEST_BINS bins (i.e. fewer
    than 20 samples) the test is not calibrated and InsufficientSamplesError
    is raised.  p-value from the chi-squared survival function with
    df = bins - 1; passes when p_value >= alpha.
    """
    if n_test_bins < MIN_TEST_BINS:
        raise ValueError(f"n_test_bins must be >= {MIN_TEST_BINS}, got {n_test_bins}")
    if not (0.0 < alpha < 1.0):
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    samples = np.asarray(samples, dtype=float)
    n = samples.size
    k = min(n_test_bins, n // MIN_EXPECTED_PER_BIN)
    if k < MIN_TEST_BINS:
        raise InsufficientSamplesError(
            f"insufficient samples: {n} cannot fill {MIN_TEST_BINS} bins at "
            f"{MIN_EXPECTED_PER_BIN} expected each"
        )
    edges = equal_probability_edges(pdf, k)
    counts, _ = np.histogram(samples, bins=edges)
    expected = n / k
    statistic = float(((counts - expected) ** 2 / expected).sum())
    p_value = float(_sps.chi2.sf(statistic, df=k - 1))
    return GofResult(statistic=statistic, p_value=p_value, passed=bool(p_value >= alpha), n_bins=k, n_samples=n)


def exact_binomial_two_sided_pvalue(k: int, n: int, p: float = 0.5) -> float:
    """Exact two-sided binomial p-value (sum of outcomes no more likely than k).

    Sums P(X = j) over all j whose pmf does not exceed pmf(k) by more than a
    relative tie tolerance — the "minlike" convention.
    """
    if not (0 <= k <= n):
        raise ValueError(f"k must lie in [0, n], got k={k}, n={n}")
    if not (0.0 < p < 1.0):
        raise ValueError(f"p must lie in (0, 1), got {p}")
    pmf = _sps.binom.pmf(np.arange(n + 1), n, p)
    return float(min(1.0, pmf[pmf <= pmf[k] * (1.0 + PMF_TIE_RTOL)].sum()))


def binomial_balance_test(n_left: int, n_right: int, alpha: float) -> BalanceResult:
    """Exact two-sided test that left/right counts are a fair 50/50 split."""
    if n_left < 0 or n_right < 0 or n_left + n_right < 1:
        raise ValueError(f"need n_left + n_right >= 1, got ({n_left}, {n_right})")
    p = exact_binomial_two_sided_pvalue(n_left, n_left + n_right, 0.5)
    return BalanceResult(p_value=p, passed=bool(p >= alpha), n_left=n_left, n_right=n_right)


def wilson_interval(successes: int, trials: int, z: float = 1.959963984540054) -> tuple[float, float]:
    """Wilson score interval for a binomial proportion (default 95%)."""
    if trials <= 0:
        raise ValueError("trials must be positive")
    if not (0 <= successes <= trials):
        raise ValueError("successes must lie in [0, trials]")
    phat = successes / trials
    z2 = z * z
    denom = 1.0 + z2 / trials
    center = (phat + z2 / (2 * trials)) / denom
    half = (z / denom) * np.sqrt(phat * (1 - phat) / trials + z2 / (4 * trials * trials))
    # The interval provably contains phat; enforce that through rounding.
    return (max(0.0, min(center - half, phat)), min(1.0, max(center + half, phat)))


def ks_distance(samples, pdf) -> float:
    """Kolmogorov-Smirnov distance between an empirical sample and a tabulated cdf.

    The reference CDF is piecewise linear (the sampler's exact law).
    """
    samples = np.sort(np.asarray(samples, dtype=float))
    n = samples.size
    if n == 0:
        raise ValueError("need at least one sample")
    cdf_knots = np.concatenate([[0.0], pdf.cdf])
    F = np.interp(samples, pdf.grid.edges, cdf_knots)
    i = np.arange(1, n + 1)
    return float(max(np.max(np.abs(F - i / n)), np.max(np.abs(F - (i - 1) / n))))


def total_variation_distance(counts_a, counts_b) -> float:
    """TV distance between two empirical count histograms (normalized)."""
    a = np.asarray(counts_a, dtype=float)
    b = np.asarray(counts_b, dtype=float)
    if a.shape != b.shape:
        raise ValueError("histograms must have the same shape")
    if a.sum() <= 0 or b.sum() <= 0:
        raise ValueError("histograms must be non-empty")
    return float(0.5 * np.abs(a / a.sum() - b / b.sum()).sum())


@dataclass(frozen=True)
class Log2Fit:
    slope: float
    intercept: float
    n_points: int
    upper_bound_only: bool


def fit_log2_acceptance(n_values, acceptance_rates, trials, z_upper: float = 1.959963984540054) -> Log2Fit:
    """Weighted least-squares fit of log2(acceptance) against N.

    Weights are inverse delta-method variances of log2(acceptance).  Rows with
    zero accepted trials enter with their Wilson upper bound and a floor
    weight; if every row is zero the fit is flagged upper_bound_only.
    """
    n_values = np.asarray(n_values, dtype=float)
    rates = np.asarray(acceptance_rates, dtype=float)
    trials = np.asarray(trials, dtype=float)
    if not (n_values.size == rates.size == trials.size) or n_values.size < 2:
        raise ValueError("need matching n/acceptance/trials arrays with >= 2 points")
    all_zero = bool(np.all(rates <= 0))
    eff = rates.copy()
    weights = np.empty_like(eff)
    for i, (r, t) in enumerate(zip(rates, trials)):
        if r <= 0:
            eff[i] = wilson_interval(0, int(t), z=z_upper)[1]
            weights[i] = 1.0  # floor weight: an upper bound carries little information
        else:
            var_rate = r * (1 - r) / t
            var_log2 = var_rate / (r * np.log(2.0)) ** 2
            weights[i] = 1.0 / max(var_log2, 1e-12)
    y = np.log2(eff)
    w = weights
    sw = w.sum()
    xbar = (w * n_values).sum() / sw
    ybar = (w * y).sum() / sw
    sxx = (w * (n_values - xbar) ** 2).sum()
    if sxx <= 0:
        raise ValueError("degenerate N values for fit")
    slope = float((w * (n_values - xbar) * (y - ybar)).sum() / sxx)
    intercept = float(ybar - slope * xbar)
    return Log2Fit(slope=slope, intercept=intercept, n_points=int(n_values.size), upper_bound_only=all_zero)
