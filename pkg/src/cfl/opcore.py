"""Dense operator algebra for finite-rank fermion systems.

Points are self-adjoint matrices on a finite-dimensional Hilbert model.
Spin spaces carry the indefinite product <psi|phi>_x = -<psi|x phi>; all
operators on a spin space are stored as matrices in a pseudo-orthonormal frame.
"""
from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence

import numpy as np

HERMITIAN_TOL = 1e-12


class SignatureError(ValueError):
    """Raised when an operator has too many positive or negative eigenvalues."""


class TransportError(ValueError):
    pass


@dataclass(frozen=True)
class HilbertModel:
    dim: int
    basis_labels: tuple = ()

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError("Hilbert model needs dim >= 1")
        labels = tuple(self.basis_labels) or tuple(range(self.dim))
        if len(labels) != self.dim or len(set(labels)) != self.dim:
            raise ValueError("basis labels must be distinct and match dim")
        object.__setattr__(self, "basis_labels", labels)


@dataclass(frozen=True)
class SpinSignature:
    p: int
    q: int

    def __post_init__(self):
        if self.p < 0 or self.q < 0 or self.p > self.q:
            raise ValueError(f"invalid spin signature ({self.p}, {self.q})")


class FermionPoint:
    """Self-adjoint finite-rank operator with cached eigendata."""

    def __init__(self, matrix, rank_tol: float | None = None,
                 signature: SpinSignature | None = None, check: bool = True):
        a = np.array(matrix, dtype=complex)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValueError("fermion point must be a square matrix")
        scale = max(1.0, float(np.abs(a).max(initial=0.0)))
        if check and np.abs(a - a.conj().T).max(initial=0.0) > HERMITIAN_TOL * scale:
            raise ValueError("matrix is not self-adjoint")
        self.matrix = 0.5 * (a + a.conj().T)
        self._rank_tol = rank_tol
        self.signature = signature
        if signature is not None and check:
            p, q = self.signature_counts()
            if p > signature.p or q > signature.q:
                raise SignatureError(
                    f"eigenvalues {self.eigvals} exceed signature "
                    f"({signature.p}, {signature.q})")

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @cached_property
    def _eigh(self):
        return np.linalg.eigh(self.matrix)

    @property
    def eigvals(self) -> np.ndarray:
        return self._eigh[0]

    @property
    def eigvecs(self) -> np.ndarray:
        return self._eigh[1]

    @property
    def rank_tol(self) -> float:
        if self._rank_tol is not None:
            return self._rank_tol
        norm = np.abs(self.eigvals).max(initial=0.0)
        return 1e-9 * max(norm, 1e-300)

    def signature_counts(self) -> tuple[int, int]:
        ev = self.eigvals
        tol = self.rank_tol
        return int(np.sum(ev > tol)), int(np.sum(ev < -tol))

    @property
    def rank(self) -> int:
        return sum(self.signature_counts())

    def to_dict(self) -> dict:
        return operator_to_dict(self.matrix, rank_tol=self.rank_tol)

    def __sub__(self, other: "FermionPoint") -> np.ndarray:
        return self.matrix - other.matrix

    def __repr__(self):
        return f"FermionPoint(dim={self.dim}, eigvals={np.round(self.eigvals, 6)})"


@dataclass
class SpinSpace:
    point: FermionPoint
    frame: np.ndarray          # n_H x d, pseudo-orthonormal columns
    eigvals: np.ndarray        # nonzero eigenvalues nu_alpha
    signs: np.ndarray          # s_alpha = -sign(nu_alpha)
    orthonormal: np.ndarray    # n_H x d, unit eigenvectors u_alpha

    @property
    def dim(self) -> int:
        return len(self.eigvals)

    @property
    def gram(self) -> np.ndarray:
        return np.diag(self.signs.astype(float))

    def spin_product(self, psi, phi) -> complex:
        return -np.vdot(psi, self.point.matrix @ phi)

    def frame_gram(self) -> np.ndarray:
        f = self.frame
        return -(f.conj().T @ self.point.matrix @ f)

    def coords(self, vec) -> np.ndarray:
        """Coefficients of pi_x vec in the frame."""
        return self.signs * (-(self.frame.conj().T @ (self.point.matrix @ vec)))


@dataclass
class SpinOperator:
    matrix: np.ndarray
    gram: np.ndarray
    symmetric_flag: bool = False

    def __post_init__(self):
        self.matrix = np.asarray(self.matrix, dtype=complex)
        self.gram = np.asarray(self.gram, dtype=float)

    def symmetry_residual(self) -> float:
        ga = self.gram @ self.matrix
        return float(np.abs(ga - ga.conj().T).max(initial=0.0))

    def is_symmetric(self, tol: float = 1e-10) -> bool:
        return self.symmetry_residual() < tol

    def adjoint(self) -> np.ndarray:
        g = self.gram
        return g @ self.matrix.conj().T @ g


@dataclass
class CausalSpectrum:
    lambdas: np.ndarray
    relation: str
    tol_real: float
    tol_modulus: float
    rank_deficit: int = 0

    def recheck(self) -> str:
        return classify_lambdas(self.lambdas, self.tol_real, self.tol_modulus)


@dataclass
class KernelMatrix:
    matrix: np.ndarray
    source: SpinSpace
    target: SpinSpace


def operator_to_dict(matrix, **extra) -> dict:
    a = np.asarray(matrix, dtype=complex)
    return {"shape": list(a.shape),
            "data": [[float(z.real), float(z.imag)] for z in a.ravel()],
            **extra}


def operator_from_dict(d: dict) -> np.ndarray:
    flat = np.array([complex(r, i) for r, i in d["data"]])
    return flat.reshape(d["shape"])


def dumps_operator(matrix, **extra) -> str:
    return json.dumps(operator_to_dict(matrix, **extra))


def local_correlation(spinor_values, spin_gram, signature: SpinSignature | None = None,
                      rank_tol: float | None = None) -> FermionPoint:
    """F_ij = -<psi_i|psi_j> with the fibre spin product given by spin_gram.

    spinor_values: array of shape (dim Y, n_H), one column per wave function.
    """
    psi = np.atleast_2d(np.asarray(spinor_values, dtype=complex))
    g = np.asarray(spin_gram, dtype=complex)
    if g.shape != (psi.shape[0], psi.shape[0]):
        raise ValueError("spin Gram does not match fibre dimension")
    if np.abs(g - g.conj().T).max() > 1e-12 or abs(np.linalg.det(g)) < 1e-14:
        raise ValueError("spin Gram must be Hermitian and invertible")
    f = -(psi.conj().T @ g @ psi)
    return FermionPoint(f, rank_tol=rank_tol, signature=signature)


def _frame_order(vecs: np.ndarray, vals: np.ndarray) -> np.ndarray:
    # align eigenvectors with the standard basis where possible
    lead = np.argmax(np.abs(vecs) > np.abs(vecs).max(axis=0) * (1 - 1e-9), axis=0)
    return np.lexsort((vals, lead))


def spin_space(x: FermionPoint) -> SpinSpace:
    vals, vecs = x.eigvals, x.eigvecs
    tol = x.rank_tol
    absv = np.abs(vals)
    if np.any((absv > tol / 10) & (absv < tol * 10)):
        warnings.warn("rank ambiguous: eigenvalue close to rank tolerance", stacklevel=2)
    keep = absv > tol
    vals, vecs = vals[keep], vecs[:, keep]
    order = _frame_order(vecs, vals) if len(vals) else np.arange(0)
    vals, vecs = vals[order], vecs[:, order]
    # fix phases: largest component real positive
    if len(vals):
        idx = np.argmax(np.abs(vecs), axis=0)
        ph = vecs[idx, np.arange(vecs.shape[1])]
        vecs = vecs * (np.abs(ph) / ph)
    frame = vecs / np.sqrt(np.abs(vals))
    signs = -np.sign(vals).astype(int)
    return SpinSpace(point=x, frame=frame, eigvals=vals, signs=signs, orthonormal=vecs)


def euclidean_sign(S: SpinSpace) -> SpinOperator:
    if S.dim == 0:
        raise ValueError("empty spin space has no sign operator")
    return SpinOperator(np.diag(S.signs.astype(complex)), S.gram, True)


def classify_lambdas(lambdas, tol_real: float = 1e-6, tol_modulus: float = 1e-6) -> str:
    lam = np.asarray(lambdas, dtype=complex)
    if lam.size == 0:
        return "lightlike"
    real = np.abs(lam.imag) <= tol_real * np.maximum(1.0, np.abs(lam))
    if np.all(real):
        return "timelike"
    mods = np.abs(lam)
    spread = (mods.max() - mods.min()) / max(mods.max(), 1e-300)
    if not np.any(real) and spread <= tol_modulus:
        return "spacelike"
    return "lightlike"


def nonzero_product_spectrum(x: FermionPoint, y: FermionPoint, tol: float | None = None):
    """Nonzero spectrum of xy via its restriction to the image of x."""
    u = spin_space(x).orthonormal
    if u.shape[1] == 0:
        return np.zeros(0, dtype=complex), 0
    block = u.conj().T @ x.matrix @ y.matrix @ u
    lam = np.linalg.eigvals(block)
    scale = max(np.abs(x.eigvals).max() * np.abs(y.eigvals).max(), 1e-300)
    cut = (1e-9 * scale) if tol is None else tol
    nz = lam[np.abs(lam) > cut]
    return nz[np.lexsort((nz.imag, nz.real))], len(lam) - len(nz)


def causal_classify(x: FermionPoint, y: FermionPoint, tol_real: float = 1e-6,
                    tol_modulus: float = 1e-6) -> CausalSpectrum:
    lam, deficit = nonzero_product_spectrum(x, y)
    if lam.size == 0:
        warnings.warn("empty product spectrum, classified lightlike", stacklevel=2)
    rel = classify_lambdas(lam, tol_real, tol_modulus)
    return CausalSpectrum(lam, rel, tol_real, tol_modulus, deficit)


def riemannian_spectrum_check(x: FermionPoint, y: FermionPoint, tol: float = 1e-8) -> bool:
    lam, _ = nonzero_product_spectrum(x, y)
    scale = max(1.0, float(np.abs(lam).max(initial=0.0)))
    return bool(np.all(np.abs(lam.imag) <= tol * scale) and np.all(lam.real >= -tol * scale))


def projection_matrix(Sx: SpinSpace, Sy: SpinSpace) -> np.ndarray:
    """Matrix of pi_x restricted to S_y in the two frames."""
    return (np.sqrt(np.abs(Sx.eigvals))[:, None] * (Sx.orthonormal.conj().T @ Sy.orthonormal)
            / np.sqrt(np.abs(Sy.eigvals))[None, :])


def kernel(x: FermionPoint, y: FermionPoint, Sx: SpinSpace | None = None,
           Sy: SpinSpace | None = None) -> KernelMatrix:
    Sx = Sx or spin_space(x)
    Sy = Sy or spin_space(y)
    m = (np.sqrt(np.abs(Sx.eigvals))[:, None]
         * (Sx.orthonormal.conj().T @ y.matrix @ Sy.orthonormal)
         / np.sqrt(np.abs(Sy.eigvals))[None, :])
    return KernelMatrix(m, source=Sy, target=Sx)


def spin_adjoint(matrix, gram_target, gram_source) -> np.ndarray:
    """Adjoint of a map S_source -> S_target with respect to the spin Grams."""
    return gram_source @ np.asarray(matrix).conj().T @ gram_target


def closed_chain(x: FermionPoint, y: FermionPoint) -> SpinOperator:
    Sx, Sy = spin_space(x), spin_space(y)
    a = kernel(x, y, Sx, Sy).matrix @ kernel(y, x, Sy, Sx).matrix
    return SpinOperator(a, Sx.gram, True)


def _sqrt_series(t: np.ndarray, terms: int = 60) -> np.ndarray:
    d = t - np.eye(len(t))
    out = np.eye(len(t), dtype=complex)
    power = np.eye(len(t), dtype=complex)
    coef = 1.0
    for k in range(1, terms):
        coef *= (0.5 - (k - 1)) / k
        power = power @ d
        out = out + coef * power
        if np.abs(power).max() * abs(coef) < 1e-17:
            break
    return out


def matrix_sqrt(t: np.ndarray) -> np.ndarray:
    d = t - np.eye(len(t))
    if np.linalg.norm(d, 2) < 0.5:
        return _sqrt_series(t)
    vals, vecs = np.linalg.eig(t)
    return vecs @ np.diag(np.sqrt(vals.astype(complex))) @ np.linalg.inv(vecs)


def transport(x: FermionPoint, y: FermionPoint) -> SpinOperator:
    """Unitary part of the polar decomposition of pi_x restricted to S_y."""
    Sx, Sy = spin_space(x), spin_space(y)
    if Sx.dim != Sy.dim:
        raise TransportError("points not transport-connectable: spin dimensions differ")
    pi = projection_matrix(Sx, Sy)
    t = pi @ spin_adjoint(pi, Sx.gram, Sy.gram)
    if Sx.dim == 0 or abs(np.linalg.det(t)) < 1e-12:
        raise TransportError("points not transport-connectable")
    rho = matrix_sqrt(t)
    u = np.linalg.solve(rho, pi)
    return SpinOperator(u, Sx.gram, False)


def transport_unitarity_residual(u: SpinOperator, gram_source) -> float:
    g = u.gram
    prod = u.matrix @ spin_adjoint(u.matrix, g, np.asarray(gram_source))
    return float(np.abs(prod - np.eye(len(prod))).max())


def hs_norm(a) -> float:
    return float(np.linalg.norm(np.asarray(a)))


def sup_norm(a) -> float:
    return float(np.linalg.norm(np.asarray(a), 2))


__all__ = [
    "HilbertModel", "SpinSignature", "FermionPoint", "SpinSpace", "SpinOperator",
    "CausalSpectrum", "KernelMatrix", "SignatureError", "TransportError",
    "local_correlation", "spin_space", "euclidean_sign", "causal_classify",
    "classify_lambdas", "nonzero_product_spectrum", "riemannian_spectrum_check",
    "kernel", "closed_chain", "transport", "projection_matrix", "spin_adjoint",
    "matrix_sqrt", "transport_unitarity_residual", "operator_to_dict",
    "operator_from_dict", "dumps_operator", "hs_norm", "sup_norm",
]
