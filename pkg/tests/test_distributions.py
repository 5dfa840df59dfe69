import math

import numpy as np
import pytest
from scipy.integrate import quad

from mqrnet.distributions import ChiSquared, Normal, StudentT, distribution_name, named_distribution
from mqrnet.rng import Rng

ALL_DISTS = [Normal(0.0, 0.25), StudentT(3), ChiSquared(3)]


def quadrature_cdf(dist, x: float) -> float:
    """Numeric integration of the density: independent of the closed-form CDF."""
    if isinstance(dist, ChiSquared):
        val, _ = quad(dist.pdf, 0.0, x)
        return val
    val, _ = quad(dist.pdf, -np.inf, x)
    return val


# --- quantile / CDF round trips -------------------------------------------

@pytest.mark.parametrize("dist", ALL_DISTS, ids=distribution_name)
def test_cdf_quantile_round_trip(dist):
    for tau in np.arange(0.05, 0.951, 0.05):
        q = dist.quantile(float(tau))
        assert abs(dist.cdf(q) - tau) < 1e-10


@pytest.mark.parametrize(
    "dist, lo, hi",
    [(Normal(0.0, 0.25), -2.0, 2.0), (StudentT(3), -6.0, 6.0), (ChiSquared(3), 0.05, 8.0)],
    ids=["normal", "t", "chi2"],
)
def test_quantile_cdf_round_trip_in_x(dist, lo, hi):
    for x in np.linspace(lo, hi, 13):
        assert abs(dist.quantile(dist.cdf(float(x))) - x) < 1e-8


def test_symmetric_medians_are_zero():
    assert Normal(0.0, 0.25).quantile(0.5) == pytest.approx(0.0, abs=1e-12)
    assert StudentT(3).quantile(0.5) == pytest.approx(0.0, abs=1e-12)


def test_chi2_median_against_quadrature_oracle():
    med = ChiSquared(3).quantile(0.5)
    # frozen from the quadrature oracle
    assert med == pytest.approx(2.365973884375338, abs=1e-9)
    assert quadrature_cdf(ChiSquared(3), med) == pytest.approx(0.5, abs=1e-10)


def test_frozen_quantiles():
    assert ChiSquared(3).quantile(0.05) == pytest.approx(0.35184631774927155, abs=1e-9)
    assert ChiSquared(3).quantile(0.95) == pytest.approx(7.814727903251173, abs=1e-9)
    assert StudentT(3).quantile(0.95) == pytest.approx(2.35336343480182, abs=1e-9)
    assert Normal(0.0, 0.25).quantile(0.95) == pytest.approx(0.8224268134757358, abs=1e-12)


@pytest.mark.parametrize("dist", [StudentT(3), ChiSquared(3)], ids=["t", "chi2"])
def test_closed_form_cdf_matches_quadrature(dist):
    xs = np.linspace(0.2, 8.0, 9) if isinstance(dist, ChiSquared) else np.linspace(-5.0, 5.0, 11)
    for x in xs:
        assert abs(dist.cdf(float(x)) - quadrature_cdf(dist, float(x))) < 1e-9


def test_student_t_pdf_is_cdf_derivative():
    t = StudentT(3)
    h = 1e-6
    for x in (-2.0, -0.3, 0.0, 1.7):
        fd = (t.cdf(x + h) - t.cdf(x - h)) / (2 * h)
        assert fd == pytest.approx(t.pdf(x), rel=1e-6)


# --- sampling ---------------------------------------------------------------

def test_normal_sample_moments():
    draws = Normal(0.0, 0.25).sample(Rng(101), 100_000)
    assert -0.01 <= draws.mean() <= 0.01
    assert 0.24 <= draws.var() <= 0.26


def test_chi2_sample_positive_with_mean_three():
    draws = ChiSquared(3).sample(Rng(55), 100_000)
    assert np.all(draws > 0)
    assert 2.95 <= draws.mean() <= 3.05


def test_sampling_deterministic():
    for dist in ALL_DISTS:
        np.testing.assert_array_equal(dist.sample(Rng(9), 5), dist.sample(Rng(9), 5))


@pytest.mark.parametrize("dist", ALL_DISTS, ids=distribution_name)
def test_samples_match_cdf_kolmogorov_smirnov(dist):
    n = 10_000
    draws = np.sort(dist.sample(Rng(2024), n))
    cdf_vals = np.array([dist.cdf(float(v)) for v in draws])
    i = np.arange(n)
    d_stat = max(np.max(cdf_vals - i / n), np.max((i + 1) / n - cdf_vals))
    assert d_stat < 1.628 / math.sqrt(n)  # 1% critical value


def test_student_t_sample_symmetry():
    draws = StudentT(3).sample(Rng(7), 100_000)
    assert abs(np.mean(draws < 0) - 0.5) < 0.01


# --- parameter validation ---------------------------------------------------

def test_invalid_parameters_rejected_at_construction():
    with pytest.raises(ValueError):
        Normal(0.0, 0.0)
    with pytest.raises(ValueError):
        Normal(0.0, -1.0)
    with pytest.raises(ValueError):
        StudentT(0)
    with pytest.raises(ValueError):
        ChiSquared(-3)
    with pytest.raises(ValueError):
        StudentT(5)  # closed forms are specific to three degrees of freedom
    with pytest.raises(ValueError):
        ChiSquared(4)


def test_quantile_rejects_tau_outside_unit_interval():
    for tau in (0.0, 1.0, -0.2, 1.7):
        with pytest.raises(ValueError):
            Normal(0.0, 1.0).quantile(tau)


def test_sample_count_validated():
    with pytest.raises(ValueError):
        Normal(0.0, 1.0).sample(Rng(0), 0)


def test_named_distributions():
    assert named_distribution("normal") == Normal(0.0, 0.25)
    assert named_distribution("t") == StudentT(3)
    assert named_distribution("chi2") == ChiSquared(3)
    with pytest.raises(ValueError):
        named_distribution("cauchy")


def test_normal_second_parameter_is_variance():
    # documented contract: Normal(0, 0.25) has standard deviation 0.5
    assert Normal(0.0, 0.25).sigma == pytest.approx(0.5)
