"""Inference around the exponent estimator.

Large-sample standard deviation of the estimate, confidence intervals,
a chi-square test for constancy of the exponent across windows, a
z-test for comparing two series, a Monte Carlo check of the variance
ordering used to justify coarse-graining, and the lag-one scaling
constant of rescaled fractional noise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.special import gamma as _gamma
from scipy.special import gammaincc, ndtri

__all__ = [
    "VarianceInputs",
    "AggregateReport",
    "VarianceOrderingSpec",
    "VarianceOrderingReport",
    "estimator_sd",
    "confidence_interval",
    "chi2_constancy",
    "z_test_means",
    "aggregate_windows",
    "check_variance_ordering",
    "a_function",
    "normal_quantile",
]


@dataclass(frozen=True)
class VarianceInputs:
    """Sizes entering the estimator's large-sample standard deviation."""

    a_max: int
    n: int
    m: int

    def __post_init__(self) -> None:
        if self.a_max <= 1:
            raise ValueError("a_max must exceed 1")
        if self.n < 1 or self.m < 1:
            raise ValueError("sample sizes must be positive")


@dataclass(frozen=True)
class AggregateReport:
    """Window-level estimates with their constancy test."""

    window_estimates: tuple[float, ...]
    mean_h: float
    sigma: float
    chi2_stat: float
    chi2_df: int
    chi2_p: float


def normal_quantile(p: float) -> float:
    """Standard normal quantile function."""
    if not 0.0 < p < 1.0:
        raise ValueError("p must lie in (0, 1)")
    return float(ndtri(p))


def _norm_sf(x: float) -> float:
    return 0.5 * math.erfc(x / math.sqrt(2.0))


def estimator_sd(inputs: VarianceInputs) -> float:
    """Large-sample standard deviation of the exponent estimate.

    The estimate behaves like the crossing point of two empirical
    distribution functions whose fluctuation scale is set by the
    sample sizes and whose separation rate is set by the log of the
    coarse lag; this gives

    ``sqrt(2 pi e) / ln(a_max) * (1/sqrt(n) + 1/sqrt(m))``.

    Doubling the coarse lag's log halves the standard deviation;
    growing both samples drives it to zero.
    """
    base = math.sqrt(2.0 * math.pi * math.e) / math.log(inputs.a_max)
    return base * (1.0 / math.sqrt(inputs.n) + 1.0 / math.sqrt(inputs.m))


def confidence_interval(
    h_hat: float, inputs: VarianceInputs, alpha: float = 0.05
) -> tuple[float, float]:
    """Two-sided normal confidence interval for the exponent.

    The raw interval ``h_hat +/- z_{1-alpha/2} * sd`` is intersected
    with ``(0, 1]``, the admissible exponent range.

    Parameters
    ----------
    h_hat : float
        Point estimate.
    inputs : VarianceInputs
        Sizes for :func:`estimator_sd`.
    alpha : float
        Level in (0, 1).

    Returns
    -------
    (float, float)
        Lower and upper endpoint, lower <= upper.
    """
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must lie in (0, 1)")
    half = normal_quantile(1.0 - alpha / 2.0) * estimator_sd(inputs)
    return (max(h_hat - half, 0.0), min(h_hat + half, 1.0))


def chi2_constancy(estimates: Sequence[float], sigma: float) -> tuple[float, int, float]:
    """Chi-square test that window estimates share one mean.

    Parameters
    ----------
    estimates : sequence of float
        Per-window exponent estimates, at least two.
    sigma : float
        Common standard deviation of one window estimate.

    Returns
    -------
    (stat, df, p)
        ``stat`` is the sum of squared standardized deviations from
        the window mean, ``df = len(estimates) - 1``, and ``p`` the
        upper-tail probability.  Invariant under shifting all
        estimates; scaling deviations and ``sigma`` together leaves
        the statistic unchanged.
    """
    est = np.asarray(estimates, dtype=float)
    if est.size < 2:
        raise ValueError("need at least two estimates")
    if not sigma > 0.0:
        raise ValueError("sigma must be positive")
    dev = (est - est.mean()) / sigma
    stat = float(dev @ dev)
    df = est.size - 1
    p = float(gammaincc(df / 2.0, stat / 2.0))
    return stat, df, p


def z_test_means(mean_a: float, mean_b: float, sigma: float) -> tuple[float, float]:
    """One-sided comparison of two mean exponents.

    Both means are treated as carrying the same standard deviation
    ``sigma``, so their difference has standard deviation
    ``sigma * sqrt(2)``.

    Returns
    -------
    (z, p)
        ``z = (mean_a - mean_b) / (sigma * sqrt(2))`` and the
        upper-tail probability ``P(Z > z)``; a large positive ``z``
        (small ``p``) indicates the first mean is larger than
        sampling noise allows.
    """
    if not sigma > 0.0:
        raise ValueError("sigma must be positive")
    z = (mean_a - mean_b) / (sigma * math.sqrt(2.0))
    return z, _norm_sf(z)


def aggregate_windows(estimates: Sequence[float], sigma: float) -> AggregateReport:
    """Bundle window estimates with their mean and constancy test."""
    est = tuple(float(h) for h in estimates)
    stat, df, p = chi2_constancy(est, sigma)
    return AggregateReport(
        window_estimates=est,
        mean_h=float(np.mean(est)),
        sigma=sigma,
        chi2_stat=stat,
        chi2_df=df,
        chi2_p=p,
    )


@dataclass(frozen=True)
class VarianceOrderingSpec:
    """Monte Carlo design for the coarse-graining variance check.

    The positive process is ``X = exp(G) * E`` with ``G`` standard
    normal and ``E`` an independent unit-mean lognormal noise of
    log-scale ``noise_sigma`` (``noise_sigma = 0`` makes ``E`` the
    constant 1).  ``V`` is the conditional mean of ``X`` on a
    partition of the range of ``G`` into ``n_partition`` equal-rank
    cells; ``n_partition >= n_outer`` degenerates to the level sets
    of ``G``, where ``V = X`` whenever ``E`` is constant.
    """

    n_outer: int = 100_000
    n_partition: int = 16
    noise_sigma: float = 0.5
    seed: int = 0
    n_batches: int = 100

    def __post_init__(self) -> None:
        if self.n_outer < 100:
            raise ValueError("n_outer must be at least 100")
        if self.n_partition < 1:
            raise ValueError("n_partition must be positive")
        if self.noise_sigma < 0.0:
            raise ValueError("noise_sigma must be nonnegative")
        if not 2 <= self.n_batches <= self.n_outer:
            raise ValueError("n_batches must lie in [2, n_outer]")


@dataclass(frozen=True)
class VarianceOrderingReport:
    """Sample variances of the process and its coarse-graining.

    ``gap`` fields are ``Var(X) - Var(V)`` and
    ``Var(sqrt(X)) - Var(sqrt(V))``; the standard errors come from
    batch means, so ``gap >= -3 * gap_se`` is the Monte Carlo version
    of the ordering ``Var(X) >= Var(V)``.
    """

    var_x: float
    var_v: float
    var_sqrt_x: float
    var_sqrt_v: float
    gap: float
    gap_se: float
    sqrt_gap: float
    sqrt_gap_se: float


def check_variance_ordering(spec: VarianceOrderingSpec) -> VarianceOrderingReport:
    """Estimate both variance orderings by Monte Carlo.

    Returns
    -------
    VarianceOrderingReport
        Conditioning on a coarser sigma-algebra can only remove
        variance, so both gaps should be nonnegative up to Monte
        Carlo error, with exact equality when ``X`` is measurable
        with respect to the partition.
    """
    rng = np.random.default_rng(spec.seed)
    g = rng.standard_normal(spec.n_outer)
    if spec.noise_sigma > 0.0:
        noise = np.exp(
            spec.noise_sigma * rng.standard_normal(spec.n_outer)
            - 0.5 * spec.noise_sigma**2
        )
    else:
        noise = np.ones(spec.n_outer)
    x = np.exp(g) * noise

    if spec.n_partition >= spec.n_outer:
        v = x.copy()
    else:
        order = np.argsort(g, kind="stable")
        cell_of = np.empty(spec.n_outer, dtype=np.intp)
        cell_of[order] = (
            np.arange(spec.n_outer, dtype=np.int64) * spec.n_partition // spec.n_outer
        )
        sums = np.bincount(cell_of, weights=x, minlength=spec.n_partition)
        counts = np.bincount(cell_of, minlength=spec.n_partition)
        v = (sums / counts)[cell_of]

    sx = np.sqrt(x)
    sv = np.sqrt(v)

    def batch_gaps(a: np.ndarray, b: np.ndarray) -> np.ndarray:
        blocks_a = np.array_split(a, spec.n_batches)
        blocks_b = np.array_split(b, spec.n_batches)
        return np.array([pa.var() - pb.var() for pa, pb in zip(blocks_a, blocks_b)])

    gaps = batch_gaps(x, v)
    sgaps = batch_gaps(sx, sv)
    return VarianceOrderingReport(
        var_x=float(x.var()),
        var_v=float(v.var()),
        var_sqrt_x=float(sx.var()),
        var_sqrt_v=float(sv.var()),
        gap=float(x.var() - v.var()),
        gap_se=float(gaps.std(ddof=1) / math.sqrt(spec.n_batches)),
        sqrt_gap=float(sx.var() - sv.var()),
        sqrt_gap_se=float(sgaps.std(ddof=1) / math.sqrt(spec.n_batches)),
    )


def a_function(hurst):
    """Lag-one scaling constant of rescaled fractional noise.

    ``Gamma(H + 1/2)**2 / (2 H sin(pi H) Gamma(2 H))`` for ``H`` in
    (0, 1).  Equals 1 at ``H = 1/2`` and has a single interior
    minimum near 0.673; it diverges at both endpoints.

    Parameters
    ----------
    hurst : float or ndarray
        Exponent(s) strictly inside (0, 1).

    Returns
    -------
    float or ndarray
    """
    h = np.asarray(hurst, dtype=float)
    if np.any(h <= 0.0) or np.any(h >= 1.0):
        raise ValueError("hurst must lie strictly inside (0, 1)")
    out = _gamma(h + 0.5) ** 2 / (2.0 * h * np.sin(np.pi * h) * _gamma(2.0 * h))
    if np.isscalar(hurst):
        return float(out)
    return out
