import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cgtomo.errors import NonPhysicalError, NotTmstFormError
from cgtomo.gaussian import (
    SingleModeParams,
    TwoModeParams,
    cov_from_params1,
    cov_from_params2,
    homodyne_joint2,
    homodyne_marginal1,
    is_physical,
    params_from_cov1,
    params_from_cov2,
    reduced_cov,
    symplectic_eigenvalues,
    tmst_abc,
)
from cgtomo.oracles import williamson_eigenvalues

nbars = st.floats(0, 5)
squeezes = st.floats(0, 2)


def test_vacuum_and_thermal():
    assert np.allclose(cov_from_params1(SingleModeParams(0, 0, 0)), 0.5 * np.eye(2))
    assert np.allclose(cov_from_params1(SingleModeParams(1, 0, 0)), 1.5 * np.eye(2))


def test_squeezed_vacuum_entries():
    g = cov_from_params1(SingleModeParams(0, 1, 0))
    assert g[0, 0] == pytest.approx(0.5 * np.exp(-2), abs=1e-12)
    assert g[0, 0] == pytest.approx(0.067668, abs=1e-6)
    assert g[1, 1] == pytest.approx(0.5 * np.exp(2), abs=1e-12)
    assert g[0, 1] == pytest.approx(0.0, abs=1e-15)


def test_params_from_cov1_examples():
    vac = params_from_cov1(0.5 * np.eye(2))
    assert (vac.nbar, vac.r, vac.phi) == pytest.approx((0, 0, 0), abs=1e-12)
    p = params_from_cov1(cov_from_params1(SingleModeParams(0, 1, np.pi / 8)))
    assert (p.nbar, p.r, p.phi) == pytest.approx((0, 1, np.pi / 8), abs=1e-10)
    p = params_from_cov1(np.diag([0.5 * np.exp(-2), 0.5 * np.exp(2)]))
    assert (p.nbar, p.r, p.phi) == pytest.approx((0, 1, 0), abs=1e-10)


def test_params_from_cov1_rejects_unphysical():
    with pytest.raises(NonPhysicalError):
        params_from_cov1(np.diag([0.2, 0.2]))


@settings(max_examples=1000)
@given(nbars, squeezes, st.floats(0, np.pi, exclude_max=True))
def test_roundtrip_single(nbar, r, phi):
    p = params_from_cov1(cov_from_params1(SingleModeParams(nbar, r, phi)))
    assert p.nbar == pytest.approx(nbar, abs=1e-7 * (1 + nbar))
    assert p.r == pytest.approx(r, abs=1e-7)
    if r > 1e-4:
        d = (p.phi - phi + np.pi / 2) % np.pi - np.pi / 2
        assert abs(d) < 1e-6 / min(1.0, r)


def test_two_mode_examples():
    assert np.allclose(cov_from_params2(TwoModeParams(0, 0, 0, 0)), 0.5 * np.eye(4))
    for r in (0.3, 1.0):
        a, b, c = tmst_abc(TwoModeParams(0, 0, r, 0))
        assert a == pytest.approx(0.5 * np.cosh(2 * r)) and b == pytest.approx(a)
        assert c == pytest.approx(-0.5 * np.sinh(2 * r))
    a, b, _ = tmst_abc(TwoModeParams(1, 1, 1, 0))
    assert a == pytest.approx(np.cosh(1) ** 2 + np.sinh(1) ** 2 + 0.5 * np.cosh(2))
    assert a == pytest.approx(1.5 * np.cosh(2)) and b == pytest.approx(a)


def test_params_from_cov2_examples():
    p = params_from_cov2(0.5 * np.eye(4))
    assert (p.nbar1, p.nbar2, p.r, p.phi) == pytest.approx((0, 0, 0, 0), abs=1e-12)
    p = params_from_cov2(cov_from_params2(TwoModeParams(0, 0, 1, np.pi / 3)))
    assert (p.nbar1, p.nbar2, p.r, p.phi) == pytest.approx((0, 0, 1, np.pi / 3), abs=1e-9)


def test_negative_real_c_is_phase_zero():
    # a = b = cosh(2)/2, c = -sinh(2)/2 is exactly the phi = 0 state, so the
    # roundtrip fixes the phase at 0 rather than pi
    g = cov_from_params2(TwoModeParams(0, 0, 1, 0))
    assert g[0, 2] == pytest.approx(-0.5 * np.sinh(2))
    p = params_from_cov2(g)
    assert p.r == pytest.approx(1) and p.phi == pytest.approx(0, abs=1e-12)
    p = params_from_cov2(cov_from_params2(TwoModeParams(0, 0, 1, np.pi)))
    assert p.phi == pytest.approx(np.pi)


def test_params_from_cov2_rejects_non_tmst():
    g = cov_from_params2(TwoModeParams(0, 0, 1, 0))
    g[0, 1] = g[1, 0] = 0.3
    with pytest.raises(NotTmstFormError):
        params_from_cov2(g)


@settings(max_examples=1000)
@given(nbars, nbars, squeezes, st.floats(0, 2 * np.pi, exclude_max=True))
def test_roundtrip_two(n1, n2, r, phi):
    p = params_from_cov2(cov_from_params2(TwoModeParams(n1, n2, r, phi)))
    scale = 1 + n1 + n2
    assert p.nbar1 == pytest.approx(n1, abs=1e-7 * scale)
    assert p.nbar2 == pytest.approx(n2, abs=1e-7 * scale)
    assert p.r == pytest.approx(r, abs=1e-7)
    if r > 1e-4:
        d = (p.phi - phi + np.pi) % (2 * np.pi) - np.pi
        assert abs(d) < 1e-6 / min(1.0, r)


def test_homodyne_marginal1():
    for a in (0.0, 0.7, 2.1):
        assert homodyne_marginal1(SingleModeParams(0, 0), a).variance == pytest.approx(0.25)
    assert homodyne_marginal1(SingleModeParams(0, 1, 0), 0).variance == pytest.approx(0.25 * np.exp(-2))
    assert homodyne_marginal1(SingleModeParams(0, 1, 0), np.pi / 4).variance == pytest.approx(0.25 * np.cosh(2))


def test_homodyne_joint2():
    j = homodyne_joint2(TwoModeParams(0, 0, 0, 0), 0.4, 1.3)
    assert np.allclose(j.cov, 0.25 * np.eye(2))
    j = homodyne_joint2(TwoModeParams(0, 0, 1, 0), 0, 0)
    assert j.correlation == pytest.approx(-np.tanh(2), abs=1e-12)


def test_joint_correlation_against_2d_integration():
    from scipy.integrate import dblquad

    j = homodyne_joint2(TwoModeParams(0.3, 0.1, 0.4, 0.5), 0.2, 0.9)
    L = 8 * np.sqrt(j.cov.diagonal().max())
    val, _ = dblquad(lambda y, x: x * y * j.pdf(x, y), -L, L, -L, L, epsabs=1e-10)
    assert val == pytest.approx(j.cov[0, 1], abs=1e-8)


def test_joint_marginal_consistency():
    p = TwoModeParams(0.5, 1.2, 0.8, 1.0)
    g = cov_from_params2(p)
    j = homodyne_joint2(p, 0.3, 1.7)
    for mode, ang in ((0, 0.3), (1, 1.7)):
        local = params_from_cov1(reduced_cov(g, mode))
        assert j.marginal(mode).variance == pytest.approx(homodyne_marginal1(local, ang).variance, abs=1e-12)


def test_is_physical_examples():
    ok, nu = is_physical(0.5 * np.eye(2))
    assert ok and nu == pytest.approx([0.5])
    assert not is_physical(0.25 * np.eye(2))[0]
    assert is_physical(cov_from_params2(TwoModeParams(1, 1, 2, 0)))[0]


def test_symplectic_eigenvalues_match_williamson(rng):
    for _ in range(50):
        p = TwoModeParams(*rng.uniform(0, 3, 2), rng.uniform(0, 2), rng.uniform(0, 6))
        g = cov_from_params2(p)
        assert np.allclose(symplectic_eigenvalues(g), williamson_eigenvalues(g), atol=1e-9)
        assert np.allclose(sorted(symplectic_eigenvalues(g)), sorted([p.nbar1 + 0.5, p.nbar2 + 0.5]), atol=1e-9)


def test_param_validation():
    with pytest.raises(ValueError):
        SingleModeParams(-1, 0)
    with pytest.raises(ValueError):
        TwoModeParams(0, 0, -0.1)
