import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from cfl import bessel
from cfl import builders as bd
from cfl import opcore as oc
from strategies import plane_points, unit_vectors

# Minkowski kernel at (dt, dx) = (0.3, 0.2), (m, eps) = (1, 0.1), from an mpmath
# quadrature of the mass-shell integral (independent of the K0/K1 closed form)
MINKOWSKI_P_03_02 = np.array([
    [-0.025723640664803964 - 0.06751309217740242j, 0.055784808589118884 + 0.04384662551347424j],
    [-0.055784808589118884 - 0.04384662551347424j, 0.09778415958907842 + 0.11981159295213917j]])
MINKOWSKI_NU = np.array([-0.1881224275653049, 0.3110791807475362])

# mpmath besselk(0, z), besselk(1, z)
K_ORACLE = {
    0.5: (0.9244190712276659, 1.656441120003301),
    3 + 2j: (-0.02078722558742977 - 0.024312663567167655j, -0.02480952007015153 - 0.0255707490563518j),
    10 - 1j: (8.845762255107157e-06 + 1.537473244620857e-05j, 9.201039634872272e-06 + 1.6160679073364917e-05j),
    0.2 + 0.1j: (1.638020774204242 - 0.4408650616787923j, 3.7647638785839037 - 2.061239988188061j),
}


@pytest.mark.parametrize("z", list(K_ORACLE))
def test_modified_bessel_against_oracle(z):
    k0, k1 = bessel.kv01(z)
    r0, r1 = K_ORACLE[z]
    assert abs(k0 - r0) <= 1e-8 * abs(r0)
    assert abs(k1 - r1) <= 1e-8 * abs(r1)


def test_j1_over_x_at_zero():
    assert bessel.j1_over_x(0.0) == pytest.approx(0.5)


# --- Dirac spheres -----------------------------------------------------------

@given(unit_vectors())
def test_sphere_traces(p):
    F = bd.sphere_operator(p)
    assert np.trace(F).real == pytest.approx(2.0, abs=1e-12)
    assert np.trace(F @ F).real == pytest.approx(10.0, abs=1e-12)


def test_sphere_antipodes_distinct():
    p = np.array([0.0, 0.6, 0.8])
    assert oc.hs_norm(bd.sphere_operator(p) - bd.sphere_operator(-p)) == pytest.approx(4 * math.sqrt(2))


def test_intersection_latitudes():
    lo, hi = bd.intersection_latitudes()
    assert (lo, hi) == (-0.5, 0.5)
    phi = 0.7
    rho = math.sqrt(1 - lo ** 2)
    p = np.array([rho * math.cos(phi), rho * math.sin(phi), lo])
    q = np.array([p[0], p[1], hi])
    assert np.allclose(bd.sphere_operator(p, 2.0, 1.0), bd.sphere_operator(q, 2.0, -1.0))


def test_build_dirac_sphere_kinds():
    single = bd.build_dirac_sphere("single", level=1)
    assert len(single) == 42
    assert single.total_measure == pytest.approx(4 * math.pi, rel=1e-12)
    assert len(bd.build_dirac_sphere("disjoint", level=1)) == 84
    assert len(bd.build_dirac_sphere("intersecting", level=1)) == 84
    with pytest.raises(ValueError):
        bd.build_dirac_sphere("disjoint", tau_plus=0.5)
    with pytest.raises(ValueError):
        bd.build_dirac_sphere("bogus")


# --- flat torus --------------------------------------------------------------

def test_torus_scalar_constant_mode():
    sysm = bd.build_torus_scalar(cutoff=0.0, n_grid=3)
    assert sysm.hilbert.dim == 1
    for x in sysm.points:
        assert x.matrix[0, 0].real == pytest.approx(-1 / (2 * math.pi) ** 2)


def test_torus_scalar_rank_one_negative():
    sysm = bd.build_torus_scalar(cutoff=2.0, n_grid=4)
    for x in sysm.points[:5]:
        assert x.rank == 1
        assert x.eigvals.max() <= 1e-12


# --- Euclidean plane ---------------------------------------------------------

@pytest.mark.parametrize("n_nodes", [2, 3, 8, 64])
@given(z=plane_points())
def test_plane_idempotent(n_nodes, z):
    F = bd.plane_point(1.0, n_nodes, z).matrix
    assert np.abs(F @ F + F).max() < 1e-12
    assert np.trace(F).real == pytest.approx(-2.0, abs=1e-12)


def test_plane_kernel_diagonal():
    assert np.allclose(bd.eval_plane_kernel(1.0, (0.2, 0.1), (0.2, 0.1)), -np.eye(2))


def test_plane_kernel_matches_discrete_model():
    M = 64
    for zp in [(0.3, -0.7), (2.0, 1.5), (-3.1, 0.4)]:
        e0 = bd.plane_evaluation(1.0, M, (0.0, 0.0))
        e1 = bd.plane_evaluation(1.0, M, zp)
        discrete = -e1 @ e0.conj().T
        assert np.allclose(discrete, bd.eval_plane_kernel(1.0, zp, (0, 0)), atol=1e-10)


def test_plane_needs_two_nodes():
    with pytest.raises(ValueError):
        bd.plane_evaluation(1.0, 1, (0, 0))


@given(plane_points(), plane_points())
def test_plane_provider_adjoint(a, b):
    assert bd.PlaneProvider(1.3).adjoint_residual(a, b) < 1e-10


# --- Minkowski ---------------------------------------------------------------

def test_minkowski_closed_form_against_oracle():
    prov = bd.build_minkowski(1.0, 0.1)
    P = prov.eval_P_closed((0.3, 0.2), (0.0, 0.0))
    assert np.abs(P - MINKOWSKI_P_03_02).max() <= 1e-8 * np.abs(MINKOWSKI_P_03_02).max()


def test_minkowski_quadrature_matches_closed_form():
    prov = bd.build_minkowski(1.0, 0.1)
    q = prov.eval_P_quad((0.3, 0.2), (0.0, 0.0))
    c = prov.eval_P_closed((0.3, 0.2), (0.0, 0.0))
    assert np.abs(q - c).max() < 1e-6 * np.abs(c).max()


def test_minkowski_nu():
    prov = bd.build_minkowski(1.0, 0.1)
    nu = prov.eval_nu()
    assert np.allclose(nu, MINKOWSKI_NU, rtol=1e-9)
    assert nu[0] < 0 < nu[1]
    assert np.allclose(prov.eval_nu_quad(), nu, rtol=1e-8)
    P0 = prov.eval_P((0.1, 0.2), (0.1, 0.2))
    assert np.allclose(P0, np.diag(nu), atol=1e-12)


@given(st.tuples(st.floats(-1, 1), st.floats(-1, 1)), st.tuples(st.floats(-1, 1), st.floats(-1, 1)))
def test_minkowski_adjoint(a, b):
    assert bd.build_minkowski(1.0, 0.1).adjoint_residual(a, b) < 1e-8


def test_momentum_model_reproduces_closed_form():
    ev, _ = bd.minkowski_momentum_model(1.0, 0.1, 256)
    prov = bd.build_minkowski(1.0, 0.1)
    z, zp = np.array([0.3, 0.2]), np.zeros(2)
    model = -ev(z) @ ev(zp).conj().T @ bd.GAMMA0
    assert np.allclose(model, prov.eval_P(z, zp), atol=1e-6)


# --- chiral ------------------------------------------------------------------

def test_chiral_nu():
    assert np.allclose(bd.build_chiral_plane(1.0, 0.5).eval_nu(), [-2.25, -0.25])


@given(plane_points(2.0))
def test_chiral_tau_zero_is_plane(z):
    a = bd.ChiralProvider(1.0, 0.0).eval_P(z, (0, 0))
    b = bd.PlaneProvider(1.0).eval_P(z, (0, 0))
    assert np.allclose(a, b)


def test_chiral_degenerate_tau():
    with pytest.raises(ValueError):
        bd.ChiralProvider(1.0, 1.0)


@given(plane_points(2.0), plane_points(2.0))
def test_chiral_adjoint(a, b):
    assert bd.ChiralProvider(1.0, 0.3).adjoint_residual(a, b) < 1e-8


# --- torus lattice -----------------------------------------------------------

def test_lattice_antipodal_distances():
    a = bd.lattice_point(0, 0).matrix
    assert oc.hs_norm(a - bd.lattice_point(math.pi, 0).matrix) == pytest.approx(math.sqrt(24), abs=1e-12)
    assert oc.hs_norm(a - bd.lattice_point(math.pi, math.pi).matrix) == pytest.approx(4.0, abs=1e-12)


def test_lattice_axis_neighbour_distance():
    k = math.pi / 8
    d = oc.hs_norm(bd.lattice_point(0, 0).matrix - bd.lattice_point(k, 0).matrix)
    assert d == pytest.approx(math.sqrt(24) * math.sin(k / 2), abs=1e-12)
    assert d == pytest.approx(0.9557, abs=1e-4)


@given(st.floats(-math.pi, math.pi), st.floats(-math.pi, math.pi))
def test_lattice_distance_formula_and_bound(dx, dy):
    d = oc.hs_norm(bd.lattice_point(0, 0).matrix - bd.lattice_point(dx, dy).matrix)
    assert d == pytest.approx(bd.lattice_distance_formula(dx, dy), abs=1e-9)
    assert d <= bd.lattice_distance_bound(dx, dy) + 1e-12


def test_build_lattice():
    sysl = bd.build_torus_lattice(math.pi / 4)
    assert len(sysl) == 64
    assert sysl.total_measure == pytest.approx(1.0)
    with pytest.raises(ValueError):
        bd.build_torus_lattice(1.0)


def test_sampled_system_json_round_trip():
    import json
    sysl = bd.build_torus_lattice(math.pi / 2)
    d = json.loads(sysl.to_json())
    assert len(d["samples"]) == 16
    assert d["signature"] == [0, 2]
