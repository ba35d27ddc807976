import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.special import erf

from cgtomo.binning import (
    BinnedDistribution,
    bin_bivariate,
    bin_gaussian,
    coarse_cross_moment,
    coarse_mean,
    coarse_pdf_eval,
    coarse_second_moment,
    coarse_variance,
    gaussian_cross_moment,
    gaussian_interval_mass,
)
from cgtomo.errors import InvalidSigmaError
from cgtomo.gaussian import BivariateMarginal, GaussianMarginal, TwoModeParams, homodyne_joint2
from cgtomo.oracles import dense_bin_masses, dense_coarse_variance, monte_carlo_cross_moment


def test_single_bin_limit():
    b = bin_gaussian(GaussianMarginal(0.25), 20.0)
    assert b.mass(0) == pytest.approx(1.0, abs=1e-12)
    assert coarse_variance(b) == pytest.approx(400 / 12, abs=1e-10)


def test_center_bin_value():
    b = bin_gaussian(GaussianMarginal(0.25), 0.5)
    assert b.mass(0) == pytest.approx(erf(1 / (2 * np.sqrt(2))), abs=1e-14)
    assert b.mass(0) == pytest.approx(0.382925, abs=1e-6)
    # 10^6-point numeric integration of the central bin
    x = np.linspace(-0.25, 0.25, 1_000_001)
    assert np.trapezoid(GaussianMarginal(0.25).pdf(x), x) == pytest.approx(b.mass(0), abs=1e-10)


@given(st.floats(0.01, 10), st.floats(0.01, 5))
def test_symmetry_and_normalization(v, s):
    b = bin_gaussian(GaussianMarginal(v), s)
    assert np.allclose(b.masses, b.masses[::-1], atol=1e-15)
    assert b.total_mass == pytest.approx(1.0, abs=1e-12)
    assert coarse_mean(b) == pytest.approx(0.0, abs=1e-12)


def test_tail_mass_is_stable():
    far = gaussian_interval_mass(np.array([30.0]), np.array([31.0]))
    assert far[0] > 0 and np.isfinite(np.log(far[0]))


def test_small_sigma_recovers_variance():
    assert coarse_variance(bin_gaussian(GaussianMarginal(0.25), 1e-3)) == pytest.approx(0.25, abs=1e-6)


def test_coarse_variance_matches_dense_grid():
    b = bin_gaussian(GaussianMarginal(0.25), 0.5)
    assert coarse_variance(b) == pytest.approx(dense_coarse_variance(0.25, 0.5), abs=1e-8)


def test_coarse_variance_matches_dense_grid_random(rng):
    for _ in range(20):
        v, s = rng.uniform(0.05, 5), rng.uniform(0.02, 3)
        assert coarse_variance(bin_gaussian(GaussianMarginal(v), s)) == pytest.approx(
            dense_coarse_variance(v, s), abs=1e-8
        )


def test_coarse_variance_sheppard_leading_term():
    # rounding adds sigma^2/12 and the flat steps another sigma^2/12, up to
    # exponentially small terms when sigma << sd
    v, s = 2.0, 0.3
    assert coarse_variance(bin_gaussian(GaussianMarginal(v), s)) == pytest.approx(v + s * s / 6, abs=1e-12)


def test_coarse_mean_hand_built():
    b = BinnedDistribution.from_mapping(1.0, {0: 0.5, 1: 0.5})
    assert coarse_mean(b) == pytest.approx(0.5)


def test_shifted_center_against_grid():
    marg = GaussianMarginal(0.3, mean=0.37)
    b = bin_gaussian(marg, 0.45)
    centers, masses = dense_bin_masses(marg, 0.45)
    assert coarse_mean(b) == pytest.approx(float(np.dot(centers, masses)), abs=1e-8)
    assert coarse_second_moment(b) == pytest.approx(
        float(np.dot(masses, centers**2 + 0.45**2 / 12)), abs=1e-8
    )


def test_invalid_sigma():
    with pytest.raises(InvalidSigmaError):
        bin_gaussian(GaussianMarginal(1.0), 0.0)
    with pytest.raises(InvalidSigmaError):
        bin_gaussian(GaussianMarginal(1.0), -1.0)


def test_pdf_eval():
    b = bin_gaussian(GaussianMarginal(0.25), 0.5)
    assert coarse_pdf_eval(b, 0.0) == pytest.approx(b.mass(0) / 0.5)
    # integral of the step function equals the total mass
    x = np.linspace(-6, 6, 240_001)
    assert np.trapezoid(coarse_pdf_eval(b, x), x) == pytest.approx(b.total_mass, abs=1e-4)


def test_step_heights_are_bin_averages():
    marg = GaussianMarginal(0.25)
    b = bin_gaussian(marg, 0.5)
    for m in range(-3, 4):
        x = np.linspace((m - 0.5) * 0.5, (m + 0.5) * 0.5, 20001)
        avg = np.trapezoid(marg.pdf(x), x) / 0.5
        assert coarse_pdf_eval(b, m * 0.5) == pytest.approx(avg, abs=1e-8)


def test_bivariate_separable():
    marg = BivariateMarginal(np.diag([0.4, 0.9]))
    j = bin_bivariate(marg, 0.6)
    bx, by = bin_gaussian(GaussianMarginal(0.4), 0.6), bin_gaussian(GaussianMarginal(0.9), 0.6)
    Mx, My = j.M
    outer = np.outer(bx.masses, by.masses)
    ox, oy = bx.M - Mx, by.M - My
    assert np.allclose(j.masses, outer[ox : ox + 2 * Mx + 1, oy : oy + 2 * My + 1], atol=1e-10)
    assert coarse_cross_moment(j) == pytest.approx(0.0, abs=1e-10)


def test_bivariate_row_sums():
    marg = homodyne_joint2(TwoModeParams(0.2, 0.4, 0.7, 1.1), 0.3, 0.8)
    j = bin_bivariate(marg, 0.5)
    for axis in (0, 1):
        ref = bin_gaussian(marg.marginal(axis), 0.5)
        got = j.marginal(axis)
        off = ref.M - got.M
        assert np.allclose(got.masses, ref.masses[off : off + got.masses.size], atol=1e-9)
        assert coarse_variance(got) == pytest.approx(coarse_variance(ref), abs=1e-9)


def test_cross_moment_small_sigma():
    marg = homodyne_joint2(TwoModeParams(0, 0, 1, 0), 0, 0)
    assert marg.cov[0, 1] == pytest.approx(-np.sinh(2) / 4)
    assert gaussian_cross_moment(marg, 1e-3) == pytest.approx(-np.sinh(2) / 4, abs=1e-6)


def test_cross_moment_monte_carlo():
    marg = homodyne_joint2(TwoModeParams(0, 0, 1, 0), 0, 0)
    mean, se = monte_carlo_cross_moment(marg, 0.5, 10_000_000, seed=7)
    assert abs(coarse_cross_moment(bin_bivariate(marg, 0.5)) - mean) < 3 * se
    assert abs(gaussian_cross_moment(marg, 0.5) - mean) < 3 * se


@settings(max_examples=30)
@given(
    st.floats(0, 2), st.floats(0, 2), st.floats(0, 1.2), st.floats(0, 6.28),
    st.floats(0, 3.14), st.floats(0, 3.14), st.floats(0.15, 2.5),
)
def test_fourier_matches_cells(n1, n2, r, phi, a1, a2, s):
    marg = homodyne_joint2(TwoModeParams(n1, n2, r, phi), a1, a2)
    ref = coarse_cross_moment(bin_bivariate(marg, s))
    assert gaussian_cross_moment(marg, s) == pytest.approx(ref, abs=1e-9 * max(1.0, abs(ref)))
