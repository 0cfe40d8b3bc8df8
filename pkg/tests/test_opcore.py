import warnings

import numpy as np
import pytest
from hypothesis import given, strategies as st

from cfl import builders as bd
from cfl.acceptance import minkowski_H_operators
from cfl import opcore as oc
from strategies import riemannian_matrices, seeds, unit_vectors


def test_local_correlation_sphere_north_pole():
    x = bd.sphere_point_from_spinors((0, 0, 1))
    assert np.allclose(np.sort(x.eigvals), [-1, 3], atol=1e-12)
    assert np.allclose(x.matrix, np.diag([3, -1]), atol=1e-12)


def test_local_correlation_zero_spinors():
    x = oc.local_correlation(np.zeros((2, 3)), np.diag([1.0, -1.0]))
    assert x.rank == 0
    assert oc.spin_space(x).dim == 0


def test_local_correlation_lattice_origin():
    x = bd.lattice_point(0.0, 0.0)
    F = x.matrix
    assert np.allclose(np.diag(F), [-1, -2, -2])
    assert np.allclose(F[0, 1:], [-1, -1])
    assert abs(abs(F[1, 2]) - np.sqrt(2)) < 1e-12


def test_local_correlation_signature_violation():
    psi = np.eye(2)
    with pytest.raises(oc.SignatureError):
        oc.local_correlation(psi, np.diag([1.0, -1.0]), signature=oc.SpinSignature(0, 2))


def test_local_correlation_rejects_singular_gram():
    with pytest.raises(ValueError):
        oc.local_correlation(np.eye(2), np.diag([1.0, 0.0]))


def test_fermion_point_rejects_non_hermitian():
    with pytest.raises(ValueError):
        oc.FermionPoint([[0, 1], [0, 0]])


def test_spin_space_diag():
    S = oc.spin_space(oc.FermionPoint(np.diag([3.0, -1.0])))
    assert S.dim == 2
    assert sorted(S.signs.tolist()) == [-1, 1]
    assert S.signs[np.argmax(S.eigvals)] == -1


def test_spin_space_zero_operator():
    assert oc.spin_space(oc.FermionPoint(np.zeros((3, 3)))).dim == 0


def test_spin_space_plane_is_riemannian():
    S = oc.spin_space(bd.plane_point(1.0, 8, (0.4, 0.1)))
    assert S.dim == 2
    assert np.all(S.signs == 1)


def test_spin_space_rank_ambiguous_warns():
    x = oc.FermionPoint(np.diag([1.0, 2e-9, 0.0]), rank_tol=1e-9)
    with pytest.warns(UserWarning, match="rank ambiguous"):
        oc.spin_space(x)


def test_euclidean_sign_riemannian_identity():
    s = oc.euclidean_sign(oc.spin_space(bd.plane_point(1.0, 8, (0, 0))))
    assert np.allclose(s.matrix, np.eye(2))


def test_euclidean_sign_minkowski_diag():
    op, _, _ = minkowski_H_operators(1.0, 0.1)
    F, _ = op((0.0, 0.0))
    S = oc.spin_space(oc.FermionPoint(F))
    s = oc.euclidean_sign(S)
    # nu1 < 0 < nu2: the negative eigenvalue carries sign +1
    order = np.argsort(S.eigvals)
    assert np.allclose(np.diag(s.matrix)[order], [1, -1])
    assert np.allclose(s.matrix @ s.matrix, np.eye(2))


def test_euclidean_sign_empty_raises():
    with pytest.raises(ValueError):
        oc.euclidean_sign(oc.spin_space(oc.FermionPoint(np.zeros((2, 2)))))


def test_causal_pole_antipole_timelike():
    c = oc.causal_classify(bd.sphere_point_from_spinors((0, 0, 1)), bd.sphere_point_from_spinors((0, 0, -1)))
    assert c.relation == "timelike"
    assert np.allclose(c.lambdas, [-3, -3])


def test_causal_pole_equator_spacelike():
    c = oc.causal_classify(bd.sphere_point_from_spinors((0, 0, 1)), bd.sphere_point_from_spinors((1, 0, 0)))
    assert c.relation == "spacelike"
    # roots of l^2 - 2 l + 9 (symbolic oracle)
    assert np.allclose(c.lambdas, [1 - 2j * np.sqrt(2), 1 + 2j * np.sqrt(2)], atol=1e-12)


def test_causal_self_timelike():
    x = bd.sphere_point_from_spinors((0.6, 0, 0.8))
    c = oc.causal_classify(x, x)
    assert c.relation == "timelike"
    assert np.allclose(np.sort(c.lambdas.real), [1, 9])


def test_causal_empty_spectrum_lightlike():
    x = oc.FermionPoint(np.diag([1.0, 0.0]))
    y = oc.FermionPoint(np.diag([0.0, 1.0]))
    with pytest.warns(UserWarning):
        c = oc.causal_classify(x, y)
    assert c.relation == "lightlike"


def test_classify_lambdas_mixed_is_lightlike():
    assert oc.classify_lambdas([1.0, 1 + 1j]) == "lightlike"
    assert oc.classify_lambdas([1 + 1j, 1 - 1j]) == "spacelike"


@given(unit_vectors(), unit_vectors())
def test_causal_swap_symmetry(p, q):
    x = oc.FermionPoint(bd.sphere_operator(p))
    y = oc.FermionPoint(bd.sphere_operator(q))
    a, b = oc.causal_classify(x, y), oc.causal_classify(y, x)
    assert a.relation == b.relation
    assert a.recheck() == a.relation
    assert len(a.lambdas) == len(b.lambdas)
    for lam in a.lambdas:
        assert np.min(np.abs(b.lambdas - lam)) < 1e-8


@given(riemannian_matrices(), riemannian_matrices())
def test_riemannian_positivity(a, b):
    assert oc.riemannian_spectrum_check(oc.FermionPoint(a), oc.FermionPoint(b))


def test_riemannian_lattice_pairs():
    pts = [bd.lattice_point(x, y) for x, y in [(0, 0), (1.0, 2.0), (np.pi, 0.3)]]
    assert all(oc.riemannian_spectrum_check(x, y) for x in pts for y in pts)


@given(unit_vectors())
def test_pseudo_orthonormal_frame(p):
    S = oc.spin_space(oc.FermionPoint(bd.sphere_operator(p)))
    assert np.allclose(S.frame_gram(), S.gram, atol=1e-10)


@given(riemannian_matrices(n=5, rank=3))
def test_fermion_point_hermitian_and_signature(a):
    x = oc.FermionPoint(a, signature=oc.SpinSignature(0, 3))
    assert np.abs(x.matrix - x.matrix.conj().T).max() < 1e-12
    p, q = x.signature_counts()
    assert p == 0 and q <= 3


def test_kernel_diagonal_on_itself():
    x = bd.sphere_point_from_spinors((0.3, 0.4, np.sqrt(0.75)))
    S = oc.spin_space(x)
    assert np.allclose(oc.kernel(x, x).matrix, np.diag(S.eigvals), atol=1e-12)


def test_kernel_orthogonal_images_zero():
    x = oc.FermionPoint(np.diag([1.0, 0.0, 0.0]))
    y = oc.FermionPoint(np.diag([0.0, -1.0, 0.0]))
    assert np.allclose(oc.kernel(x, y).matrix, 0)


@given(unit_vectors(), unit_vectors())
def test_kernel_spin_adjoint(p, q):
    x = oc.FermionPoint(bd.sphere_operator(p))
    y = oc.FermionPoint(bd.sphere_operator(q))
    Sx, Sy = oc.spin_space(x), oc.spin_space(y)
    a = oc.kernel(x, y).matrix
    b = oc.kernel(y, x).matrix
    assert np.allclose(a, oc.spin_adjoint(b, Sx.gram, Sy.gram), atol=1e-10)


@given(unit_vectors(), unit_vectors())
def test_closed_chain_spectrum_matches_lambdas(p, q):
    x = oc.FermionPoint(bd.sphere_operator(p))
    y = oc.FermionPoint(bd.sphere_operator(q))
    A = oc.closed_chain(x, y)
    assert A.is_symmetric(1e-9)
    ev = np.linalg.eigvals(A.matrix)
    lam = oc.causal_classify(x, y).lambdas
    for v in lam:
        assert np.min(np.abs(ev - v)) < 1e-8


def test_closed_chain_plane_values():
    x = bd.plane_point(1.0, 64, (0, 0))
    assert np.allclose(oc.closed_chain(x, x).matrix, np.eye(2), atol=1e-12)
    # J0(2)^2 + J1(2)^2 from an mpmath Bessel evaluation
    y = bd.plane_point(1.0, 64, (2.0, 0.0))
    assert np.allclose(oc.closed_chain(x, y).matrix, 0.3827385848666721 * np.eye(2), atol=1e-10)


def test_transport_identity():
    x = bd.sphere_point_from_spinors((0, 0.6, 0.8))
    u = oc.transport(x, x)
    assert np.allclose(u.matrix, np.eye(2), atol=1e-12)


@given(unit_vectors(), st.floats(0.01, 0.3), seeds)
def test_transport_unitary_nearby(p, h, seed):
    rng = np.random.default_rng(seed)
    q = p + h * rng.normal(size=3)
    q /= np.linalg.norm(q)
    x, y = oc.FermionPoint(bd.sphere_operator(p)), oc.FermionPoint(bd.sphere_operator(q))
    u = oc.transport(x, y)
    assert oc.transport_unitarity_residual(u, oc.spin_space(y).gram) < 1e-10


@given(unit_vectors(), st.floats(0.001, 0.5))
def test_transport_composition_is_identity(p, h):
    # U_{y,x} is the spin adjoint of the unitary U_{x,y}, so the composition is
    # the identity to rounding (stronger than the O(h^2) ladder bound)
    a = np.cross(p, [1.0, 0.0, 0.0] if abs(p[0]) < 0.9 else [0.0, 1.0, 0.0])
    a /= np.linalg.norm(a)
    q = np.cos(h) * p + np.sin(h) * a
    x, y = oc.FermionPoint(bd.sphere_operator(p)), oc.FermionPoint(bd.sphere_operator(q))
    comp = oc.transport(x, y).matrix @ oc.transport(y, x).matrix
    assert np.abs(comp - np.eye(2)).max() < 1e-10


def test_transport_dimension_mismatch():
    with pytest.raises(oc.TransportError):
        oc.transport(oc.FermionPoint(np.diag([1.0, 0.0])), oc.FermionPoint(np.diag([1.0, -1.0])))


def test_matrix_sqrt_branches():
    t = np.array([[1.2, 0.1], [0.1, 0.9]])
    assert np.allclose(oc.matrix_sqrt(t) @ oc.matrix_sqrt(t), t)
    t2 = np.diag([4.0, 9.0])
    assert np.allclose(oc.matrix_sqrt(t2), np.diag([2.0, 3.0]))


def test_operator_round_trip():
    a = np.array([[1, 2j], [-2j, 3]])
    assert np.allclose(oc.operator_from_dict(oc.operator_to_dict(a)), a)


def test_norms():
    a = np.diag([3.0, -4.0])
    assert oc.hs_norm(a) == pytest.approx(5.0)
    assert oc.sup_norm(a) == pytest.approx(4.0)


def test_spin_signature_validation():
    with pytest.raises(ValueError):
        oc.SpinSignature(2, 1)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        oc.SpinSignature(1, 1)
