"""Error distributions: normal, Student's t(3), chi-squared(3).

Each distribution exposes sampling, a closed-form CDF, the density, and the
quantile function (inverse CDF).  Quantiles are computed by bracketed
bisection refined with Newton steps on the closed-form CDF, accurate to
about 1e-12 in CDF value.

NOTE: ``Normal`` takes the **variance** as its second parameter, not the
standard deviation.  ``Normal(0.0, 0.25)`` has standard deviation 0.5.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .rng import Rng

_SQRT2 = math.sqrt(2.0)
_SQRT3 = math.sqrt(3.0)


@dataclass(frozen=True)
class Normal:
    """Normal law parameterized by mean and *variance*."""

    mu: float = 0.0
    variance: float = 1.0

    def __post_init__(self):
        if not (self.variance > 0.0 and math.isfinite(self.variance)):
            raise ValueError(f"variance must be positive and finite, got {self.variance}")
        if not math.isfinite(self.mu):
            raise ValueError(f"mean must be finite, got {self.mu}")

    @property
    def sigma(self) -> float:
        return math.sqrt(self.variance)

    def sample(self, rng: Rng, n: int) -> np.ndarray:
        _check_count(n)
        return self.mu + self.sigma * rng.normal(n)

    def cdf(self, x: float) -> float:
        return 0.5 * (1.0 + math.erf((x - self.mu) / (self.sigma * _SQRT2)))

    def pdf(self, x: float) -> float:
        z = (x - self.mu) / self.sigma
        return math.exp(-0.5 * z * z) / (self.sigma * math.sqrt(2.0 * math.pi))

    def quantile(self, tau: float) -> float:
        _check_tau(tau)
        return _invert_cdf(self, tau, lo=self.mu - 40.0 * self.sigma, hi=self.mu + 40.0 * self.sigma)


@dataclass(frozen=True)
class StudentT:
    """Student's t law. Only three degrees of freedom are supported: the
    closed-form CDF below is specific to dof = 3."""

    dof: float = 3.0

    def __post_init__(self):
        if self.dof <= 0:
            raise ValueError(f"degrees of freedom must be positive, got {self.dof}")
        if self.dof != 3:
            raise ValueError("only StudentT(3) is supported")

    def sample(self, rng: Rng, n: int) -> np.ndarray:
        # Z / sqrt(V / 3) with V a chi-squared(3) variate.
        _check_count(n)
        z = rng.normal(n)
        v = np.sum(rng.normal(3 * n).reshape(n, 3) ** 2, axis=1)
        return z / np.sqrt(v / 3.0)

    def cdf(self, x: float) -> float:
        s = x / _SQRT3
        return 0.5 + (s / (1.0 + x * x / 3.0) + math.atan(s)) / math.pi

    def pdf(self, x: float) -> float:
        return 2.0 / (math.pi * _SQRT3 * (1.0 + x * x / 3.0) ** 2)

    def quantile(self, tau: float) -> float:
        _check_tau(tau)
        # t(3) quantiles stay within +/-2000 for tau in (4e-10, 1-4e-10);
        # the bracket is widened on demand for more extreme levels.
        lo, hi = -2000.0, 2000.0
        while self.cdf(lo) > tau:
            lo *= 8.0
        while self.cdf(hi) < tau:
            hi *= 8.0
        return _invert_cdf(self, tau, lo=lo, hi=hi)


@dataclass(frozen=True)
class ChiSquared:
    """Chi-squared law. Only three degrees of freedom are supported: the
    closed-form CDF below is specific to dof = 3."""

    dof: float = 3.0

    def __post_init__(self):
        if self.dof <= 0:
            raise ValueError(f"degrees of freedom must be positive, got {self.dof}")
        if self.dof != 3:
            raise ValueError("only ChiSquared(3) is supported")

    def sample(self, rng: Rng, n: int) -> np.ndarray:
        # Sum of three squared standard normals.
        _check_count(n)
        z = rng.normal(3 * n).reshape(n, 3)
        return np.sum(z * z, axis=1)

    def cdf(self, x: float) -> float:
        if x <= 0.0:
            return 0.0
        return math.erf(math.sqrt(0.5 * x)) - math.sqrt(2.0 * x / math.pi) * math.exp(-0.5 * x)

    def pdf(self, x: float) -> float:
        if x <= 0.0:
            return 0.0
        return math.sqrt(x) * math.exp(-0.5 * x) / math.sqrt(2.0 * math.pi)

    def quantile(self, tau: float) -> float:
        _check_tau(tau)
        hi = 60.0
        while self.cdf(hi) < tau:
            hi *= 2.0
        return _invert_cdf(self, tau, lo=0.0, hi=hi)


ErrorDistribution = Normal | StudentT | ChiSquared

_NAMED = {
    "normal": lambda: Normal(0.0, 0.25),
    "t": lambda: StudentT(3),
    "chi2": lambda: ChiSquared(3),
}


def named_distribution(name: str) -> ErrorDistribution:
    """The three benchmark error laws: N(0, 0.25), t(3), chi-squared(3)."""
    try:
        return _NAMED[name]()
    except KeyError:
        raise ValueError(f"unknown distribution {name!r}; choose from {sorted(_NAMED)}") from None


def distribution_name(dist: ErrorDistribution) -> str:
    if isinstance(dist, Normal):
        return "normal" if (dist.mu, dist.variance) == (0.0, 0.25) else f"normal({dist.mu},{dist.variance})"
    if isinstance(dist, StudentT):
        return "t"
    return "chi2"


def _invert_cdf(dist, tau: float, lo: float, hi: float) -> float:
    """Bisection to a tight bracket, then Newton polish on the CDF."""
    flo, fhi = dist.cdf(lo), dist.cdf(hi)
    if not (flo <= tau <= fhi):
        raise ValueError(f"bracket [{lo}, {hi}] does not contain quantile {tau}")
    for _ in range(90):
        mid = 0.5 * (lo + hi)
        if mid == lo or mid == hi:
            break
        if dist.cdf(mid) < tau:
            lo = mid
        else:
            hi = mid
    x = 0.5 * (lo + hi)
    for _ in range(4):
        d = dist.pdf(x)
        if d <= 0.0:
            break
        step = (dist.cdf(x) - tau) / d
        x_new = x - step
        if not (lo <= x_new <= hi):
            break
        x = x_new
        if abs(step) < 1e-15 * max(1.0, abs(x)):
            break
    return x


def _check_tau(tau: float):
    if not 0.0 < tau < 1.0:
        raise ValueError(f"quantile level must lie in (0, 1), got {tau}")


def _check_count(n: int):
    if n < 1:
        raise ValueError(f"sample count must be >= 1, got {n}")
