import numpy as np
import pytest
from hypothesis import given, strategies as st

from cfl import builders as bd
from cfl import clifford as cf
from cfl import spinstruct as ss
from cfl import tangentcone as tc
from cfl.acceptance import chiral_c0

SIGNDIFF = tc.ConeFunctional(tc.Kind.SIGNDIFF)
CHAIN = tc.ConeFunctional(tc.Kind.CHAIN)
small = st.tuples(st.floats(-0.5, 0.5), st.floats(-0.5, 0.5))


@pytest.fixture(scope="module")
def mink():
    return tc.ProviderSource(bd.MinkowskiProvider(1.0, 0.1))


@pytest.fixture(scope="module")
def augmented(mink):
    return ss.time_augmented_dA(mink, (0.0, 0.0), 0.2)


def test_chiral_c0_value():
    # 2 m tau (1 - tau^2) at m = 1, tau = 1/2
    assert chiral_c0(1.0, 0.5) == pytest.approx(0.75, rel=1e-6)


@pytest.mark.parametrize("m", [0.5, 2.0])
def test_chiral_c0_linear_in_mass(m):
    # 2 m tau (1 - tau^2): linear in m, so a cubic mass law only agrees at m = 1
    assert chiral_c0(m, 0.5) == pytest.approx(0.75 * m, rel=1e-6)


def test_chiral_c0_flips_with_orientation():
    src = tc.ProviderSource(bd.ChiralProvider(1.0, 0.5), orientation=-1)
    D = ss.derivative(src, (0.0, 0.0), CHAIN)
    ref = 1j * bd.SIGMA1 @ bd.SIGMA3
    c0 = cf.hs_inner(ref, D.columns[0]) / cf.hs_inner(ref, ref)
    assert c0 == pytest.approx(-0.75, rel=1e-6)


def test_dA_zero_direction(mink):
    d, err = ss.dA(mink, (0.1, 0.2), (0.0, 0.0))
    assert np.all(d == 0) and err == 0.0


def test_minkowski_unaugmented_derivative(mink):
    D = ss.derivative(mink, (0.0, 0.0))
    # no time component, the spatial one lies along gamma2
    assert np.abs(D.columns[0]).max() < 1e-10
    c1 = D.columns[1]
    g2 = cf.project(cf.orthonormalize([bd.GAMMA2]), c1)
    assert np.abs(c1 - g2).max() < 1e-10
    gm = ss.gamma_map(D, [bd.GAMMA0, bd.GAMMA2])
    assert gm.rank == 1
    assert not gm.bijective


def test_time_augmented_rank_and_signature(augmented):
    gm = ss.gamma_map(augmented, [bd.GAMMA0, bd.GAMMA2])
    assert gm.rank == 2 and gm.bijective
    assert ss.metric_signature(gm.induced_metric) == (1, 1, 0)
    assert gm.clifford_residual() < 1e-8


def test_time_coefficients(augmented):
    c = ss.time_coefficients(augmented)
    assert abs(c["c0"]) > 1e-5
    assert c["c1"] == pytest.approx(4.992016, rel=1e-5)


def test_time_augmented_empty_ball(mink):
    labs = np.array([[1.0, 1.0], [2.0, 2.0]])
    with pytest.raises(ss.BallEmptyError):
        ss.time_augmented_dA(mink, (0.0, 0.0), 0.1, samples=(labs, np.ones(2)))


def test_sign_derivative_anticommutes(mink):
    for u in ((1.0, 0.0), (0.0, 1.0), (0.6, -0.8)):
        res = ss.sign_derivative_anticommute(mink, (0.0, 0.0), u, (1e-4,))
        assert res[0] < 1e-6


@given(small, small)
def test_E_antisymmetric(z, zp):
    src = tc.ProviderSource(bd.MinkowskiProvider(1.0, 0.1))
    assert abs(ss.E_functional(src, z, zp) + ss.E_functional(src, zp, z)) <= 1e-15 * (
        1 + abs(ss.E_functional(src, z, zp)))


@given(st.floats(-1, 1))
def test_E_vanishes_without_spatial_separation(t):
    src = tc.ProviderSource(bd.MinkowskiProvider(1.0, 0.1))
    assert abs(ss.E_functional(src, (0.0, 0.0), (t, 0.0))) < 1e-14


def test_E_closed_form_fixed_pair(mink):
    _, _, rel = ss.E_closedform_check(mink, (0.2, 0.3), (0.0, 0.0))
    assert rel < 1e-6


@given(small, small)
def test_E_closed_form_random(z, zp):
    src = tc.ProviderSource(bd.MinkowskiProvider(1.0, 0.1))
    assert ss.E_closedform_check(src, z, zp)[2] < 1e-6


def test_E_cubic_fit_leading_term(mink):
    fit = ss.E_cubic_fit(mink)
    assert fit["txx"] < -10
    assert abs(fit["txx"]) > 1e4 * max(abs(fit[k]) for k in ("tt", "tx", "xx", "ttx", "xxx"))


@given(small, small)
def test_parity_word_traces(z, zp):
    assert ss.parity_word_residual(bd.MinkowskiProvider(1.0, 0.1), z, zp) < 1e-10


def test_fd_order_is_two(mink):
    orders = ss.fd_order(mink, (0.0, 0.0), (0.3, 1.0), SIGNDIFF, [0.02, 0.01, 0.005, 0.0025])
    assert np.all(orders > 1.5)


def test_derivative_linear(mink):
    D = ss.derivative(mink, (0.0, 0.0))
    assert D.linearity_residual(mink, (0.0, 0.0), SIGNDIFF, np.random.default_rng(1)) < 1e-6


def test_induced_metric_riemannian_chiral():
    src = tc.ProviderSource(bd.ChiralProvider(1.0, 0.5))
    D = ss.derivative(src, (0.0, 0.0), CHAIN)
    gm = ss.gamma_map(D, [bd.SIGMA1, bd.SIGMA2])
    assert gm.bijective
    assert ss.metric_signature(gm.induced_metric) == (2, 0, 0)
    assert gm.clifford_residual() < 1e-8


def test_metric_signature_counts():
    assert ss.metric_signature(np.diag([1.0, -2.0, 0.0])) == (1, 1, 1)


def test_disk_rule_area():
    _, w = ss.disk_rule(0.3)
    assert w.sum() == pytest.approx(np.pi * 0.09, rel=1e-12)


def test_spin_structure_csv(tmp_path, augmented):
    gm = ss.gamma_map(augmented, [bd.GAMMA0, bd.GAMMA2])
    p = tmp_path / "gamma.csv"
    gm.to_csv(p)
    assert p.read_text().splitlines()[0] == "axis,c0,c1"
