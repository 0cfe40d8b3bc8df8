"""Directional derivatives of cone functionals, spin structures and the time direction.

Sources are ProviderSource-like objects whose labels are coordinates, so a
tangent vector u at x is the straight line x + t u in the label chart.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .builders import GAMMA0
from .clifford import CliffordSubspace, hs_inner, orthonormalize
from .tangentcone import ConeFunctional, Kind, Part, ProviderSource, eval_A


class BallEmptyError(ValueError):
    pass


def _richardson(fn, h: float):
    """Central difference with one Richardson halving; returns (value, error estimate)."""
    d1 = (fn(h) - fn(-h)) / (2 * h)
    d2 = (fn(h / 2) - fn(-h / 2)) / h
    best = (4 * d2 - d1) / 3
    return best, float(np.max(np.abs(best - d2)))


def dA(source, x, u, f: ConeFunctional = ConeFunctional(Kind.SIGNDIFF), h: float = 1e-3):
    """Derivative of the cone functional at x along u; returns (matrix, error)."""
    x = np.asarray(x, float)
    u = np.asarray(u, float)
    if not np.any(u):
        d = len(source.nu(tuple(x)))
        return np.zeros((d, d), complex), 0.0
    return _richardson(lambda t: eval_A(f, source, tuple(x), tuple(x + t * u)), h)


@dataclass
class DirectionalDerivative:
    """Linear map R^k -> Symm(S_x), stored by its values on the coordinate axes."""
    columns: list
    h: float
    scheme: str = "central_fd"
    error: float = 0.0

    @property
    def k(self) -> int:
        return len(self.columns)

    def __call__(self, u) -> np.ndarray:
        return sum((c * a for c, a in zip(u, self.columns)), np.zeros_like(self.columns[0]))

    def linearity_residual(self, source, x, f: ConeFunctional, rng, n: int = 3) -> float:
        """Compare the stored linear map with fresh derivatives along random directions."""
        worst = 0.0
        for _ in range(n):
            u = rng.normal(size=self.k)
            direct, _ = dA(source, x, u, f, self.h)
            worst = max(worst, float(np.max(np.abs(direct - self(u)))))
        return worst


def derivative(source, x, f: ConeFunctional = ConeFunctional(Kind.SIGNDIFF),
               h: float = 1e-3) -> DirectionalDerivative:
    x = np.asarray(x, float)
    cols, err = [], 0.0
    for i in range(len(x)):
        e = np.zeros(len(x))
        e[i] = 1.0
        c, e_i = dA(source, x, e, f, h)
        cols.append(c)
        err = max(err, e_i)
    return DirectionalDerivative(cols, h, "central_fd", err)


def fd_order(source, x, u, f: ConeFunctional, hs: Sequence[float]) -> np.ndarray:
    """Observed convergence orders of plain central differences along a halving ladder."""
    x = np.asarray(x, float)
    u = np.asarray(u, float)

    def central(h):
        return (eval_A(f, source, tuple(x), tuple(x + h * u))
                - eval_A(f, source, tuple(x), tuple(x - h * u))) / (2 * h)

    vals = [central(h) for h in hs]
    diffs = [np.max(np.abs(vals[i] - vals[i + 1])) for i in range(len(vals) - 1)]
    ratios = [diffs[i] / diffs[i + 1] for i in range(len(diffs) - 1)]
    return np.log2(np.array(ratios))


# --- spin structures ---------------------------------------------------------

@dataclass
class SpinStructureMap:
    coefficients: np.ndarray     # k x dim(Cl), gamma(e_i) = sum_j C_ij basis_j
    basis: list
    bijective: bool
    rank: int
    induced_metric: np.ndarray

    def __call__(self, u) -> np.ndarray:
        c = np.asarray(u, float) @ self.coefficients
        return sum((a * b for a, b in zip(c, self.basis)), np.zeros_like(self.basis[0]))

    @property
    def k(self) -> int:
        return self.coefficients.shape[0]

    def clifford_residual(self) -> float:
        """max |{gamma(u), gamma(v)} - 2 g(u,v) id| over coordinate axes."""
        d = self.basis[0].shape[0]
        worst = 0.0
        for i in range(self.k):
            for j in range(self.k):
                a, b = self(np.eye(self.k)[i]), self(np.eye(self.k)[j])
                r = a @ b + b @ a - 2 * self.induced_metric[i, j] * np.eye(d)
                worst = max(worst, float(np.max(np.abs(r))))
        return worst

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["axis"] + [f"c{j}" for j in range(self.coefficients.shape[1])])
            for i, row in enumerate(self.coefficients):
                w.writerow([i, *row])


def _rank(mat: np.ndarray, rel_tol: float) -> int:
    sv = np.linalg.svd(mat, compute_uv=False)
    if sv.size == 0 or sv[0] == 0:
        return 0
    return int(np.sum(sv > rel_tol * sv[0]))


def gamma_map(deriv: DirectionalDerivative, cl: CliffordSubspace | Sequence[np.ndarray],
              rel_tol: float = 1e-6, abs_tol: float = 1e-10) -> SpinStructureMap:
    """Project each d A(e_i) onto the Clifford subspace in the Hilbert-Schmidt metric."""
    basis = list(cl.basis) if isinstance(cl, CliffordSubspace) else [np.asarray(b, complex) for b in cl]
    on = orthonormalize(basis)
    # coefficients in the given (not orthonormalized) basis
    gram = np.array([[hs_inner(a, b) for b in basis] for a in basis])
    rhs = np.array([[hs_inner(b, c) for b in basis] for c in deriv.columns])
    coef = np.linalg.solve(gram, rhs.T).T if len(basis) else np.zeros((deriv.k, 0))
    scale = max((np.sqrt(hs_inner(c, c)) for c in deriv.columns), default=0.0)
    rank = 0 if scale < abs_tol else _rank(coef, rel_tol)
    bij = rank == deriv.k == len(on)
    smap = SpinStructureMap(coef, basis, bij, rank, np.zeros((deriv.k, deriv.k)))
    smap.induced_metric = induced_metric(smap)
    return smap


def induced_metric(gmap: SpinStructureMap) -> np.ndarray:
    """g(u, v) with {gamma(u), gamma(v)} = 2 g(u, v) id, i.e. Re Tr(gamma(u) gamma(v)) / d."""
    k = gmap.k
    d = gmap.basis[0].shape[0]
    cols = [gmap(np.eye(k)[i]) for i in range(k)]
    g = np.array([[np.trace(a @ b).real / d for b in cols] for a in cols])
    return 0.5 * (g + g.T)


def metric_signature(g: np.ndarray, tol: float = 1e-10) -> tuple[int, int, int]:
    """(positive, negative, zero) eigenvalue counts."""
    ev = np.linalg.eigvalsh(g)
    scale = max(np.abs(ev).max(), 1e-300) if ev.size else 1.0
    pos = int(np.sum(ev > tol * scale))
    neg = int(np.sum(ev < -tol * scale))
    return pos, neg, len(ev) - pos - neg


def sign_derivative_anticommute(source, x, u, h_ladder: Sequence[float] = (1e-2, 1e-3, 1e-4)):
    """Residuals |{s_x, dA(u)}| for the sign-difference functional along an h ladder."""
    x = np.asarray(x, float)
    u = np.asarray(u, float)
    s = np.diag(source.signs(tuple(x))).astype(complex)
    f = ConeFunctional(Kind.SIGNDIFF)
    out = []
    for h in h_ladder:
        d = (eval_A(f, source, tuple(x), tuple(x + h * u))
             - eval_A(f, source, tuple(x), tuple(x - h * u))) / (2 * h)
        out.append(float(np.max(np.abs(s @ d + d @ s))))
    return np.array(out)


# --- time direction ----------------------------------------------------------

def B_functional(source, z, zp, gamma0=GAMMA0) -> complex:
    a = source.P(tuple(z), tuple(zp))
    b = source.P(tuple(zp), tuple(z))
    c = a @ gamma0 - gamma0 @ a
    return complex(np.trace(c @ b @ c @ b))


def E_functional(source, z, zp, gamma0=GAMMA0) -> float:
    val = (B_functional(source, z, zp, gamma0) - B_functional(source, zp, z, gamma0)) / 2j
    return float(val.real)


def E_closedform(source, z, zp) -> complex:
    """i c Tr(z pi' pi z' - z z' pi pi') in the pseudo-orthonormal frames."""
    nu = np.asarray(source.nu(tuple(z)), float)
    c = 4 * nu[0] ** 2 * nu[1] ** 2 / (nu[1] - nu[0]) ** 2
    a = source.P(tuple(z), tuple(zp))
    b = source.P(tuple(zp), tuple(z))
    ni = np.diag(1 / nu)
    return 1j * c * (np.trace(a @ ni @ b @ ni @ a @ b) - np.trace(a @ b @ ni @ a @ ni @ b))


def E_closedform_check(source, z, zp, gamma0=GAMMA0, abs_floor: float = 1e-14):
    """Return (lhs, rhs, relerr) for the closed-form identity of E."""
    lhs = (B_functional(source, z, zp, gamma0) - B_functional(source, zp, z, gamma0)) / 2j
    rhs = E_closedform(source, z, zp)
    scale = max(abs(lhs), abs(rhs))
    relerr = 0.0 if scale < abs_floor else abs(lhs - rhs) / scale
    return lhs, rhs, float(relerr)


def E_cubic_fit(source, z=(0.0, 0.0), scale: float = 2.5e-3, n: int = 9) -> dict:
    """Least-squares fit of E(z, z + xi) by monomials up to degree 3 on a square grid."""
    g = np.linspace(-scale, scale, n)
    rows, vals = [], []
    names = ["1", "t", "x", "tt", "tx", "xx", "ttt", "ttx", "txx", "xxx"]
    for a in g:
        for b in g:
            rows.append([1, a, b, a * a, a * b, b * b, a ** 3, a * a * b, a * b * b, b ** 3])
            vals.append(E_functional(source, z, (z[0] + a, z[1] + b)))
    coef, *_ = np.linalg.lstsq(np.array(rows), np.array(vals), rcond=None)
    return dict(zip(names, coef))


def parity_word_residual(provider, z, zp, words: Sequence[str] = ("ab", "agbg", "agbgab", "aabbg"),
                         gamma0=GAMMA0) -> float:
    """Traces of words in a = P(z,z'), b = P(z',z), g = gamma0 under spatial reflection.

    Reflection x -> -x acts on the kernel by conjugation with gamma0, which
    flips gamma1 and fixes gamma0, so every such trace must be unchanged.
    """
    def refl(c):
        return np.array([c[0], -c[1]])

    z = np.asarray(z, float)
    zp = np.asarray(zp, float)
    sets = [
        {"a": provider.eval_P(z, zp), "b": provider.eval_P(zp, z), "g": gamma0},
        {"a": gamma0 @ provider.eval_P(refl(z), refl(zp)) @ gamma0,
         "b": gamma0 @ provider.eval_P(refl(zp), refl(z)) @ gamma0, "g": gamma0},
    ]
    worst = 0.0
    for w in words:
        tr = []
        for m in sets:
            acc = np.eye(2, dtype=complex)
            for ch in w:
                acc = acc @ m[ch]
            tr.append(np.trace(acc))
        worst = max(worst, abs(tr[0] - tr[1]))
    return float(worst)


def disk_rule(delta: float, n_radial: int = 16, n_angular: int = 16):
    """Product Gauss rule on the disk of radius delta: (offsets (n,2), weights)."""
    x, w = np.polynomial.legendre.leggauss(n_radial)
    r = 0.5 * delta * (x + 1)
    wr = 0.5 * delta * w * r
    th = 2 * np.pi * (np.arange(n_angular) + 0.5) / n_angular
    off = np.array([(ri * np.cos(t), ri * np.sin(t)) for ri in r for t in th])
    wts = np.array([wi * 2 * np.pi / n_angular for wi in wr for _ in th])
    return off, wts


def time_augmented_dA(source, x, delta: float, h: float = 1e-3,
                      f: ConeFunctional = ConeFunctional(Kind.SIGNDIFF),
                      samples: tuple | None = None, n_radial: int = 16,
                      n_angular: int = 16) -> DirectionalDerivative:
    """Derivative of A(z') + s_x * integral over B_delta(z') of E(x, theta) d rho(theta).

    The ball integral is differentiated under the integral sign: the derivative
    along u is the integral over B_delta(x) of the u-derivative of E(x, .).
    samples=(labels, weights) uses the sample measure instead of the Gauss rule.
    """
    x = np.asarray(x, float)
    if samples is None:
        off, wts = disk_rule(delta, n_radial, n_angular)
        nodes = x[None, :] + off
    else:
        labs = np.asarray(samples[0], float)
        wts_all = np.asarray(samples[1], float)
        inside = np.linalg.norm(labs - x[None, :], axis=1) < delta
        if not np.any(inside):
            raise BallEmptyError("ball empty: delta below the sample resolution")
        nodes, wts = labs[inside], wts_all[inside]
    base = derivative(source, x, f, h)
    s = np.diag(source.signs(tuple(x))).astype(complex)
    cols = []
    for i, col in enumerate(base.columns):
        e = np.zeros(len(x))
        e[i] = 1.0

        def ball(t):
            return sum(w * E_functional(source, x, nd + t * e) for nd, w in zip(nodes, wts))

        dI, _ = _richardson(ball, h)
        cols.append(col + dI * s)
    return DirectionalDerivative(cols, h, "central_fd", base.error)


def time_coefficients(deriv: DirectionalDerivative, gamma0=GAMMA0) -> dict:
    """Components of dA(e_0) along gamma0 and of dA(e_1) along the remaining generator."""
    from .builders import GAMMA2
    g0 = orthonormalize([gamma0])[0]
    g2 = orthonormalize([GAMMA2])[0]
    return {"c0": hs_inner(g0, deriv.columns[0]) / np.sqrt(hs_inner(gamma0, gamma0)),
            "c1": hs_inner(g2, deriv.columns[1]) / np.sqrt(hs_inner(GAMMA2, GAMMA2))}
