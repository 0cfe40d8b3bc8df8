"""Clifford subspaces of symmetric spin-space operators."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.linalg import null_space

from .builders import GAMMA0, GAMMA1, GAMMA2, ID2, SIGMA1, SIGMA2, SIGMA3
from .opcore import SpinOperator, SpinSpace

CLIFFORD_TOL = 1e-9


class CliffordError(ValueError):
    pass


def _mat(u) -> np.ndarray:
    return u.matrix if isinstance(u, SpinOperator) else np.asarray(u, dtype=complex)


def hs_inner(a, b) -> float:
    """Ambient positive inner product Re Tr(A^dagger B) on Symm(S_x)."""
    return float(np.real(np.vdot(_mat(a), _mat(b))))


def orthonormalize(mats: Sequence[np.ndarray], tol: float = 1e-12) -> list:
    out = []
    for m in mats:
        v = np.array(_mat(m), dtype=complex)
        for q in out:
            v = v - hs_inner(q, v) * q
        n = np.sqrt(hs_inner(v, v))
        if n > tol:
            out.append(v / n)
    return out


def project(basis_on: Sequence[np.ndarray], a) -> np.ndarray:
    a = _mat(a)
    return sum((hs_inner(q, a) * q for q in basis_on), np.zeros_like(a, dtype=complex))


@dataclass
class CliffordSubspace:
    basis: list
    gram: np.ndarray
    signature: tuple
    spin_gram: np.ndarray

    @property
    def dim(self) -> int:
        return len(self.basis)

    def orthonormal_basis(self) -> list:
        return orthonormalize(self.basis)

    def to_dict(self) -> dict:
        return {"basis": [[[float(z.real), float(z.imag)] for z in b.ravel()] for b in self.basis],
                "gram": self.gram.tolist(), "signature": list(self.signature)}


def check_clifford(ops: Sequence, spin_gram=None, tol: float = CLIFFORD_TOL) -> CliffordSubspace:
    mats = [_mat(u) for u in ops]
    if not mats:
        raise CliffordError("empty operator list")
    d = mats[0].shape[0]
    g = np.eye(d) if spin_gram is None else np.asarray(spin_gram, dtype=float)
    for a in mats:
        ga = g @ a
        if np.abs(ga - ga.conj().T).max() > tol:
            raise CliffordError("operator is not symmetric with respect to the spin product")
    k = len(mats)
    gram = np.zeros((k, k))
    eye = np.eye(d)
    for i in range(k):
        for j in range(i, k):
            ac = mats[i] @ mats[j] + mats[j] @ mats[i]
            c = np.trace(ac) / (2 * d)
            if np.abs(ac - 2 * c * eye).max() >= tol or abs(c.imag) >= tol:
                raise CliffordError("anticommutator is not a multiple of the identity")
            gram[i, j] = gram[j, i] = c.real
    ev = np.linalg.eigvalsh(gram)
    if np.any(np.abs(ev) < tol):
        raise CliffordError("degenerate anticommutator form")
    sig = (int(np.sum(ev > 0)), int(np.sum(ev < 0)))
    if np.all(g == np.eye(d)) and sig[1] > 0:
        raise CliffordError("definite spin space must give signature (m, 0)")
    return CliffordSubspace(mats, gram, sig, g)


def random_recombination(K: CliffordSubspace, rng) -> CliffordSubspace:
    """Random invertible recombination followed by re-orthogonalization of the gram."""
    k = K.dim
    while True:
        a = rng.normal(size=(k, k))
        if abs(np.linalg.det(a)) > 0.1:
            break
    mats = [sum(a[i, j] * K.basis[j] for j in range(k)) for i in range(k)]
    # diagonalize the anticommutator form
    g = a @ K.gram @ a.T
    w, v = np.linalg.eigh(g)
    mats = [sum(v[j, i] * mats[j] for j in range(k)) / np.sqrt(abs(w[i])) for i in range(k)]
    return check_clifford(mats, K.spin_gram)


@dataclass
class ExtensionFamily:
    parametrization: Callable
    kind: str
    parameter_dim: int
    spin_gram: np.ndarray

    def __call__(self, param) -> CliffordSubspace:
        return self.parametrization(param)

    def sample_parameters(self, n: int) -> list:
        if self.parameter_dim == 1:
            return list(np.linspace(0.0, np.pi, n, endpoint=False))
        out = []
        golden = np.pi * (3 - np.sqrt(5))
        for i in range(n):
            z = 1 - (i + 0.5) / n
            r = np.sqrt(max(0.0, 1 - z * z))
            out.append(np.array([r * np.cos(golden * i), r * np.sin(golden * i), z]))
        return out


def _orthogonal_pair(nu) -> tuple[np.ndarray, np.ndarray]:
    nu = np.asarray(nu, dtype=float)
    nu = nu / np.linalg.norm(nu)
    trial = np.array([1.0, 0.0, 0.0]) if abs(nu[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
    a = trial - nu * np.dot(nu, trial)
    a /= np.linalg.norm(a)
    b = np.cross(nu, a)
    return a, b


def extension_family(S: SpinSpace | None = None, kind: str | None = None,
                     conjugator: np.ndarray | None = None) -> ExtensionFamily:
    """Parametrized Clifford families on a two-dimensional spin space.

    causal: phi -> span(gamma0, gamma1 cos phi + gamma2 sin phi) in the frame.
    riemannian: nu -> {v . sigma : v orthogonal to nu}.
    For the Dirac sphere the operators are conjugated into the point's frame by
    the given conjugator matrix.
    """
    if S is not None and S.dim != 2:
        raise ValueError("families are parametrized for two-dimensional spin spaces only")
    if kind is None:
        kind = "riemannian" if S is None or np.all(S.signs == S.signs[0]) else "causal"
    c = np.eye(2) if conjugator is None else np.asarray(conjugator, dtype=complex)
    cinv = np.linalg.inv(c)

    def conj(a):
        return c @ a @ cinv

    if kind == "causal":
        gram = np.diag([1.0, -1.0])

        def param(phi):
            return check_clifford([conj(GAMMA0), conj(GAMMA1 * np.cos(phi) + GAMMA2 * np.sin(phi))],
                                  gram)
        return ExtensionFamily(param, kind, 1, gram)
    if kind == "riemannian":
        gram = np.eye(2)

        def param(nu):
            a, b = _orthogonal_pair(nu)
            ops = [conj(a[0] * SIGMA1 + a[1] * SIGMA2 + a[2] * SIGMA3),
                   conj(b[0] * SIGMA1 + b[1] * SIGMA2 + b[2] * SIGMA3)]
            return check_clifford(ops, gram)
        return ExtensionFamily(param, kind, 3, gram)
    raise ValueError(f"unknown family kind {kind!r}")


def dirac_sphere_extension(p, u) -> CliffordSubspace:
    """span(s_x, i |F|^{-1/2} u.sigma |F|^{1/2}) at the sphere point p, u orthogonal to p."""
    p = np.asarray(p, float)
    u = np.asarray(u, float)
    if abs(np.dot(p, u)) > 1e-9 or abs(np.linalg.norm(u) - 1) > 1e-9:
        raise ValueError("u must be a unit vector orthogonal to p")
    pd = p[0] * SIGMA1 + p[1] * SIGMA2 + p[2] * SIGMA3
    ud = u[0] * SIGMA1 + u[1] * SIGMA2 + u[2] * SIGMA3
    absf = pd + 2 * ID2
    w, v = np.linalg.eigh(absf)
    half = v @ np.diag(np.sqrt(w)) @ v.conj().T
    mhalf = v @ np.diag(1 / np.sqrt(w)) @ v.conj().T
    f = 2 * pd + ID2
    s = -pd
    gen = 1j * mhalf @ ud @ half
    # symmetric w.r.t. -<.|F .>, i.e. Gram -F
    return _check_with_hermitian_gram([s, gen], -f)


def _check_with_hermitian_gram(ops, herm_gram, tol=CLIFFORD_TOL) -> CliffordSubspace:
    g = np.asarray(herm_gram, dtype=complex)
    for a in ops:
        ga = g @ a
        if np.abs(ga - ga.conj().T).max() > tol:
            raise CliffordError("operator not symmetric")
    k = len(ops)
    gram = np.zeros((k, k))
    for i in range(k):
        for j in range(k):
            ac = ops[i] @ ops[j] + ops[j] @ ops[i]
            c = np.trace(ac) / (2 * len(g))
            if np.abs(ac - 2 * c * np.eye(len(g))).max() >= tol:
                raise CliffordError("anticommutator is not scalar")
            gram[i, j] = c.real
    ev = np.linalg.eigvalsh(gram)
    return CliffordSubspace(list(ops), gram, (int(np.sum(ev > tol)), int(np.sum(ev < -tol))),
                            np.real(g))


def symmetric_basis(spin_gram) -> list:
    """Real basis of Symm(S_x) (matrices A with G A Hermitian), HS-orthonormal."""
    g = np.asarray(spin_gram, dtype=float)
    d = len(g)
    herm = []
    for i in range(d):
        e = np.zeros((d, d), complex)
        e[i, i] = 1
        herm.append(e)
        for j in range(i + 1, d):
            e = np.zeros((d, d), complex)
            e[i, j] = e[j, i] = 1 / np.sqrt(2)
            herm.append(e)
            e = np.zeros((d, d), complex)
            e[i, j], e[j, i] = -1j / np.sqrt(2), 1j / np.sqrt(2)
            herm.append(e)
    ginv = np.linalg.inv(g)
    return orthonormalize([ginv @ h for h in herm])


def ac_space(S: SpinSpace | None = None, sign=None, tol: float = 1e-9):
    """Basis of {u in Symm : {u, s} = 0} and the Gram Tr(uv)/d (expected negative definite).

    Basis elements are HS-orthogonal and scaled so that Tr(u u^*)/d = 1.
    """
    if sign is None:
        sign = np.diag(S.signs.astype(complex))
    sign = np.asarray(sign, dtype=complex)
    g = np.real(np.diag(np.diag(sign))) if S is None else S.gram
    basis = symmetric_basis(g)
    # linear map c -> {sum c_i b_i, s}
    cols = np.array([(b @ sign + sign @ b).ravel() for b in basis]).T
    real_cols = np.vstack([cols.real, cols.imag])
    ns = null_space(real_cols, rcond=1e-10)
    d = len(sign)
    ac = [np.sqrt(d) * u for u in orthonormalize([sum(c[i] * basis[i] for i in range(len(basis))) for c in ns.T])]
    gram = np.array([[np.real(np.trace(a @ b)) / d for b in ac] for a in ac])
    if len(ac):
        ev = np.linalg.eigvalsh(gram)
        negdef = bool(np.all(ev < -tol))
    else:
        negdef = True
    return ac, gram, negdef


def pin_generator(v, spin_gram=None, tol: float = 1e-9) -> np.ndarray:
    """v if v^2 = 1, i v if v^2 = -1; the result is unitary w.r.t. the spin product."""
    v = _mat(v)
    d = len(v)
    sq = v @ v
    if np.abs(sq - np.eye(d)).max() < tol:
        return v.copy()
    if np.abs(sq + np.eye(d)).max() < tol:
        return 1j * v
    raise CliffordError("generator must square to +-1")


def adjoint_action(g, K: CliffordSubspace) -> np.ndarray:
    """Matrix of u -> g u g^{-1} on K in the basis of K."""
    g = _mat(g)
    gi = np.linalg.inv(g)
    basis = K.basis
    flat = np.array([b.ravel() for b in basis]).T
    out = np.zeros((len(basis), len(basis)))
    for j, b in enumerate(basis):
        img = (g @ b @ gi).ravel()
        coef, res, *_ = np.linalg.lstsq(flat, img, rcond=None)
        if np.abs(flat @ coef - img).max() > 1e-8:
            raise CliffordError("g does not preserve K")
        out[:, j] = coef.real
    return out


def stabilizer_membership(U, K: CliffordSubspace, tol: float = 1e-9) -> dict:
    U = _mat(U)
    Ui = np.linalg.inv(U)
    on = orthonormalize(K.basis)
    in_g0 = all(np.abs(U @ b @ Ui - b).max() < tol for b in K.basis)
    in_gk = True
    for b in K.basis:
        img = U @ b @ Ui
        if np.abs(img - project(on, img)).max() >= tol:
            in_gk = False
            break
    return {"in_GK": bool(in_gk), "in_G0": bool(in_g0)}


MODELS = {
    "riemannian": (SIGMA1, SIGMA2),
    "causal": (GAMMA0, GAMMA1),
}


def clifford_compatible_frame(K: CliffordSubspace, model: Sequence[np.ndarray],
                              spin_gram=None, tol: float = 1e-9) -> np.ndarray:
    """Frame change T (columns = new frame vectors in old coordinates) with T^{-1} K_i T = model_i.

    K's basis is first recombined into generators with the model's anticommutator
    values; the change of frame is pseudo-unitary for the spin Gram.
    """
    model = [np.asarray(m, dtype=complex) for m in model]
    g = np.eye(len(model[0])) if spin_gram is None else np.asarray(spin_gram, float)
    Km = check_clifford(model, g)
    if Km.signature != K.signature:
        raise CliffordError("model and subspace have different signatures")
    gens = _normal_generators(K)
    mgens = _normal_generators(Km)
    # order generators by sign of square to match the model
    gens = sorted(gens, key=lambda t: -t[1])
    mgens = sorted(mgens, key=lambda t: -t[1])
    a = [x[0] for x in gens]
    b = [x[0] for x in mgens]
    t = _intertwiner(a, b, g)
    if t is None:
        # try flipping signs of generators
        for flips in ([1, -1], [-1, 1], [-1, -1]):
            t = _intertwiner([f * x for f, x in zip(flips, a)], b, g)
            if t is not None:
                break
    if t is None:
        raise CliffordError("no Clifford-compatible frame found")
    # express the model generators' originals: recombine so T^{-1} K_i T = model_i
    return t


def _normal_generators(K: CliffordSubspace):
    w, v = np.linalg.eigh(K.gram)
    out = []
    for i in range(len(w)):
        m = sum(v[j, i] * K.basis[j] for j in range(K.dim)) / np.sqrt(abs(w[i]))
        out.append((m, np.sign(w[i])))
    return out


def _intertwiner(a, b, g, tol=1e-8):
    """Solve a_i T = T b_i for T, normalized pseudo-unitary w.r.t. g."""
    d = len(g)
    eye = np.eye(d)
    rows = [np.kron(ai, eye) - np.kron(eye, bi.T) for ai, bi in zip(a, b)]
    ns = null_space(np.vstack(rows), rcond=1e-10)
    if ns.shape[1] == 0:
        return None
    t = ns[:, 0].reshape(d, d)
    # scale so that T^dagger g T = g (up to a positive factor)
    h = t.conj().T @ g @ t
    c = np.trace(h @ np.linalg.inv(g)) / d
    if abs(c) < 1e-12 or abs(c.imag) > 1e-8 or c.real < 0:
        return None
    t = t / np.sqrt(c.real)
    if np.abs(t.conj().T @ g @ t - g).max() > tol:
        return None
    return t


def principal_angles(basis_a: Sequence, basis_b: Sequence) -> np.ndarray:
    qa = orthonormalize(basis_a)
    qb = orthonormalize(basis_b)
    m = np.array([[hs_inner(x, y) for y in qb] for x in qa])
    s = np.clip(np.linalg.svd(m, compute_uv=False), -1.0, 1.0)
    return np.arccos(s)


def grassmann_distance(basis_a, basis_b) -> float:
    return float(np.linalg.norm(principal_angles(basis_a, basis_b)))
