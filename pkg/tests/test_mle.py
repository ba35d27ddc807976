import numpy as np
import pytest
from scipy.optimize import minimize_scalar

from cgtomo.binning import bin_gaussian
from cgtomo.direct import UnknownFrame, frame_averaged_metrics2, reconstruct_single
from cgtomo.gaussian import GaussianMarginal, SingleModeParams, TwoModeParams, homodyne_marginal1
from cgtomo.metrics import log_negativity
from cgtomo.mle import (
    MleConfig,
    SingleModeData,
    angle_set,
    bin_log_likelihood,
    log_likelihood1,
    mle_estimate_single,
    mle_estimate_two,
    mle_fit_single,
    relative_entropy,
    simulate_single,
)
from cgtomo.oracles import quadrature_bin_log_likelihood

FAST = MleConfig(restarts=4)


def test_bin_integrals_match_quadrature(rng):
    for _ in range(20):
        v_data, v_est, s = rng.uniform(0.1, 3), rng.uniform(0.1, 3), rng.uniform(0.1, 2)
        b = bin_gaussian(GaussianMarginal(v_data), s)
        j = rng.integers(0, b.masses.size)
        slow = quadrature_bin_log_likelihood(GaussianMarginal(v_est), s, b.centers[j : j + 1], b.masses[j : j + 1])
        assert bin_log_likelihood(GaussianMarginal(v_est), b)[j] == pytest.approx(slow[0], abs=1e-10)


def test_vacuum_data_prefers_vacuum():
    b = bin_gaussian(homodyne_marginal1(SingleModeParams(0, 0), 0.0), 0.3)
    data = [(0.0, b)]
    assert log_likelihood1(SingleModeParams(0, 0), data) > log_likelihood1(SingleModeParams(0, 0.5, 0), data)


def test_zero_coarse_graining_self_consistency():
    p = SingleModeParams(0.3, 0.7, 0.4)
    data = simulate_single(p, 1e-4, 30)
    angles = angle_set(30)
    var = np.array([homodyne_marginal1(p, a).variance for a in angles])
    entropy = np.pi / 30 * np.sum(0.5 * np.log(2 * np.pi * np.e * var))
    best = log_likelihood1(p, data)
    assert best == pytest.approx(-entropy, abs=1e-6)
    for dn in (-0.05, 0.05):
        for dr in (-0.05, 0.05):
            for dphi in (-0.05, 0.05):
                other = SingleModeParams(p.nbar + dn, p.r + dr, p.phi + dphi)
                assert log_likelihood1(other, data) < best


def test_relative_entropy():
    b = bin_gaussian(GaussianMarginal(0.7), 0.4)
    assert relative_entropy(b, b) == pytest.approx(0.0, abs=1e-12)
    assert relative_entropy(b, GaussianMarginal(0.7)) > 0
    assert relative_entropy(b, GaussianMarginal(0.75)) > 0


def test_min_relative_entropy_is_max_likelihood():
    b = bin_gaussian(GaussianMarginal(0.7), 0.6)
    d = minimize_scalar(lambda v: relative_entropy(b, GaussianMarginal(v)), bounds=(0.1, 3), method="bounded",
                        options={"xatol": 1e-10})
    ll = minimize_scalar(lambda v: -bin_log_likelihood(GaussianMarginal(v), b).sum(), bounds=(0.1, 3),
                         method="bounded", options={"xatol": 1e-10})
    assert d.x == pytest.approx(ll.x, abs=1e-7)
    # maximizer is the coarse variance
    assert ll.x == pytest.approx(0.7 + 0.36 / 6, abs=1e-7)


def test_small_sigma_recovery_single():
    p = SingleModeParams(0, 1, 0.3)
    e = mle_estimate_single(p, 1e-4, FAST).params
    assert (e.nbar, e.r, e.phi) == pytest.approx((0, 1, 0.3), abs=1e-3)


def test_small_sigma_recovery_two():
    e = mle_estimate_two(TwoModeParams(0, 0, 1, 0.7), 1e-4, FAST).params
    assert (e.nbar1, e.nbar2, e.r, e.phi) == pytest.approx((0, 0, 1, 0.7), abs=1e-3)


@pytest.mark.parametrize("phi", [0.2, 1.0])
def test_mle_avoids_rotation(phi):
    p = SingleModeParams(0, 1, phi)
    e = mle_estimate_single(p, 0.5, FAST).params
    direct = reconstruct_single(p, 0.5, UnknownFrame()).angle_deviation
    assert abs(e.phi - phi) < 0.01 * abs(direct)


def test_mle_anisotropy_grows():
    p = SingleModeParams(0, 1, 0)
    e = mle_estimate_single(p, 0.5, FAST).params
    assert (2 * e.nbar + 1) * np.sinh(2 * e.r) > np.sinh(2)


def test_two_mode_symmetry_and_intermediate():
    p = TwoModeParams(0, 0, 1, 0)
    e = mle_estimate_two(p, 0.5, FAST).params
    assert abs(e.nbar1 - e.nbar2) < 1e-4
    en = log_negativity(e)
    assert en < 2 / np.log(2)
    assert en > frame_averaged_metrics2(0, 0, 1, 0.5).nonclassicality


def test_deterministic_and_result_fields():
    p = SingleModeParams(1, 1, 0.5)
    a = mle_estimate_single(p, 0.8, MleConfig(restarts=3, seed=5))
    b = mle_estimate_single(p, 0.8, MleConfig(restarts=3, seed=5))
    assert a.params == b.params and a.log_likelihood == b.log_likelihood
    assert len(a.restart_values) == 3 and a.restart_values[a.best_restart] == max(a.restart_values)
    assert a.converged


def test_fit_from_binned_data_matches_moment_path():
    p = SingleModeParams(0.2, 0.6, 0.9)
    angles = angle_set(20)
    binned = [(a, bin_gaussian(homodyne_marginal1(p, a), 0.7)) for a in angles]
    data = SingleModeData.from_binned(binned)
    cand = SingleModeParams(0.3, 0.5, 1.0)
    total = sum(bin_log_likelihood(homodyne_marginal1(cand, a), b).sum() for a, b in binned)
    assert log_likelihood1(cand, data) == pytest.approx(np.pi / 20 * total, abs=1e-10)
    assert log_likelihood1(cand, binned) == pytest.approx(log_likelihood1(cand, data), abs=1e-12)
    fit = mle_fit_single(data, FAST, guess=p)
    assert fit.params.r > 0


def test_coarse_model_recovers_input():
    p = SingleModeParams(0, 1, 0.4)
    cfg = MleConfig(angle_count=20, restarts=2, coarse_model=True)
    e = mle_estimate_single(p, 0.5, cfg).params
    assert (e.nbar, e.r, e.phi) == pytest.approx((0, 1, 0.4), abs=1e-4)
