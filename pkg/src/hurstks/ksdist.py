"""Kolmogorov-Smirnov machinery and the rescaled-increment objective.

The estimator works by rescaling coarse-lag increments with a
candidate exponent and measuring how far their empirical distribution
sits from the fine-lag one; the relevant distance is the exact
two-sample Kolmogorov-Smirnov statistic.  A Gaussian closed form of
the same distance doubles as the population-level objective.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from hurstks.fgn import IncrementSample
from hurstks.permute import DegenerateSampleError

__all__ = [
    "EmpiricalCdf",
    "RescaledPair",
    "DiameterCurvePoint",
    "ecdf_eval",
    "ks_two_sample",
    "ks_critical",
    "diameter_objective",
    "scaled_diameter_fn",
    "diameter_curve",
    "gaussian_diameter",
]


@dataclass(frozen=True)
class EmpiricalCdf:
    """Right-continuous empirical distribution function of a sample."""

    sorted_values: np.ndarray
    size: int

    @classmethod
    def from_sample(cls, values: np.ndarray | Sequence[float]) -> "EmpiricalCdf":
        vals = np.sort(np.asarray(values, dtype=float))
        if vals.size == 0:
            raise ValueError("empty sample has no distribution function")
        if not np.all(np.isfinite(vals)):
            raise ValueError("sample values must be finite")
        return cls(sorted_values=vals, size=vals.size)


@dataclass(frozen=True)
class RescaledPair:
    """Increment samples of one path at the two endpoint lags.

    ``fine`` holds lag-1 increments, ``coarse`` lag-``a_max``
    increments; ``a_max`` must exceed 1 for the rescaling to carry any
    information.
    """

    fine: IncrementSample
    coarse: IncrementSample
    a_max: int

    def __post_init__(self) -> None:
        if self.a_max <= 1:
            raise ValueError("a_max must exceed 1")
        if self.fine.lag != 1:
            raise ValueError("fine sample must have lag 1")
        if self.coarse.lag != self.a_max:
            raise ValueError("coarse sample lag must equal a_max")


@dataclass(frozen=True)
class DiameterCurvePoint:
    """Objective value at one candidate exponent."""

    hurst: float
    value: float


def ecdf_eval(cdf: EmpiricalCdf, x: float | np.ndarray) -> float | np.ndarray:
    """Evaluate the empirical CDF (fraction of sample ``<= x``)."""
    out = np.searchsorted(cdf.sorted_values, x, side="right") / cdf.size
    return float(out) if np.isscalar(x) else out


def _ks_sorted(a: np.ndarray, b: np.ndarray) -> float:
    # Exact sup over the real line: evaluate both step functions at
    # every pooled point and immediately to its left.
    pooled = np.concatenate([a, b])
    n, m = a.size, b.size
    fa_r = np.searchsorted(a, pooled, side="right") / n
    fb_r = np.searchsorted(b, pooled, side="right") / m
    fa_l = np.searchsorted(a, pooled, side="left") / n
    fb_l = np.searchsorted(b, pooled, side="left") / m
    d = max(np.abs(fa_r - fb_r).max(), np.abs(fa_l - fb_l).max())
    return float(d)


def ks_two_sample(first: EmpiricalCdf, second: EmpiricalCdf) -> float:
    """Two-sample Kolmogorov-Smirnov statistic, computed exactly.

    Parameters
    ----------
    first, second : EmpiricalCdf
        The two empirical distribution functions.

    Returns
    -------
    float
        ``sup_x |F(x) - G(x)|``, a value in ``[0, 1]``.  Symmetric in
        its arguments and invariant under any strictly increasing
        transform applied to both samples.
    """
    return _ks_sorted(first.sorted_values, second.sorted_values)


def ks_critical(n: int, m: int, alpha: float) -> float:
    """Asymptotic two-sample rejection threshold at level ``alpha``.

    Returns ``c(alpha) * sqrt((n + m) / (n * m))`` with
    ``c(alpha) = sqrt(-ln(alpha / 2) / 2)``, the Smirnov large-sample
    constant (1.3581 at the 5% level).
    """
    if n < 1 or m < 1:
        raise ValueError("sample sizes must be positive")
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must lie in (0, 1)")
    c = math.sqrt(-math.log(alpha / 2.0) / 2.0)
    return c * math.sqrt((n + m) / (n * m))


def scaled_diameter_fn(pair: RescaledPair) -> Callable[[float], float]:
    """Build the frozen objective ``H -> KS(fine, a^{-H} * coarse)``.

    Sorting happens once here; each evaluation then only rescales the
    coarse sample (a positive factor, so order is preserved) and runs
    the KS comparison.  Use this closure, not repeated calls to
    :func:`diameter_objective`, inside optimization loops.
    """
    fine = np.sort(pair.fine.values)
    coarse = np.sort(pair.coarse.values)
    if fine[0] == fine[-1] or coarse[0] == coarse[-1]:
        raise DegenerateSampleError("constant increment sample")
    a_max = float(pair.a_max)

    def objective(hurst: float) -> float:
        if not 0.0 < hurst <= 1.0:
            raise ValueError("hurst must lie in (0, 1]")
        return _ks_sorted(fine, coarse * a_max ** (-hurst))

    return objective


def diameter_objective(pair: RescaledPair, hurst: float) -> float:
    """Empirical distance between rescaled increment distributions.

    The fine sample is left at its natural scale (the unit lag raised
    to any exponent is 1) while the coarse sample is multiplied by
    ``a_max ** (-hurst)``; the value is the exact two-sample KS
    statistic between the two rescaled samples.  At the true exponent
    of a self-similar path with decorrelated increments both samples
    share one distribution and the value is small.

    Parameters
    ----------
    pair : RescaledPair
        Fine and coarse increment samples.
    hurst : float
        Candidate exponent in ``(0, 1]``.

    Returns
    -------
    float
        Value in ``[0, 1]``.

    Raises
    ------
    DegenerateSampleError
        If either sample is constant.
    """
    return scaled_diameter_fn(pair)(hurst)


def diameter_curve(pair: RescaledPair, grid: Sequence[float]) -> list[DiameterCurvePoint]:
    """Objective values over a grid of candidate exponents."""
    fn = scaled_diameter_fn(pair)
    return [DiameterCurvePoint(hurst=float(h), value=fn(float(h))) for h in grid]


def _norm_cdf(x: float) -> float:
    return 0.5 * math.erfc(-x / math.sqrt(2.0))


def gaussian_diameter(variance_ratio: float) -> float:
    """KS distance between centered normals with variances 1 and ``v``.

    The two distribution functions cross where the densities are
    equal, at ``x* = +/- sqrt(ln v / (1 - 1/v))``; by symmetry the
    distance is ``|Phi(x*) - Phi(x*/sqrt(v))|``.  Satisfies
    ``D(v) = D(1/v)``, vanishes only at ``v = 1``, and grows like
    ``|v - 1| / (2 sqrt(2 pi e))`` near 1.

    Parameters
    ----------
    variance_ratio : float
        Positive ratio of the two variances.

    Returns
    -------
    float
        Value in ``[0, 1)``.
    """
    v = float(variance_ratio)
    if not v > 0.0:
        raise ValueError("variance ratio must be positive")
    if v == 1.0:
        return 0.0
    x = math.sqrt(math.log(v) / (1.0 - 1.0 / v))
    return abs(_norm_cdf(x) - _norm_cdf(x / math.sqrt(v)))
