"""Concrete fermion systems: sampled operator sets and analytic kernel providers."""
from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import bessel
from .opcore import FermionPoint, HilbertModel, SpinSignature, local_correlation

SIGMA1 = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA2 = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA3 = np.array([[1, 0], [0, -1]], dtype=complex)
PAULI = (SIGMA1, SIGMA2, SIGMA3)
ID2 = np.eye(2, dtype=complex)

# two-dimensional Dirac matrices, spin Gram gamma0
GAMMA0 = np.array([[1, 0], [0, -1]], dtype=complex)
GAMMA1 = np.array([[0, 1], [-1, 0]], dtype=complex)
GAMMA2 = np.array([[0, -1j], [-1j, 0]], dtype=complex)


@dataclass
class Sample:
    coords: tuple
    point: FermionPoint
    weight: float


@dataclass
class SampledSystem:
    hilbert: HilbertModel
    signature: SpinSignature
    samples: list
    provider: "KernelProvider | None" = None
    total_measure: float | None = None

    def __post_init__(self):
        if self.total_measure is None:
            self.total_measure = float(sum(s.weight for s in self.samples))
        if any(s.weight < 0 for s in self.samples):
            raise ValueError("negative sample weight")

    def __len__(self):
        return len(self.samples)

    @property
    def points(self) -> list:
        return [s.point for s in self.samples]

    @property
    def coords(self) -> np.ndarray:
        return np.array([s.coords for s in self.samples], dtype=float)

    @property
    def weights(self) -> np.ndarray:
        return np.array([s.weight for s in self.samples], dtype=float)

    def to_json(self) -> str:
        return json.dumps({
            "dim": self.hilbert.dim,
            "signature": [self.signature.p, self.signature.q],
            "samples": [{"coords": list(map(float, s.coords)), "weight": s.weight,
                         "matrix": [[float(z.real), float(z.imag)] for z in s.point.matrix.ravel()]}
                        for s in self.samples],
        })


class KernelProvider:
    """Analytic, translation-invariant kernel P(zeta', zeta) on a 2-dim fibre."""

    fibre_gram: np.ndarray = ID2.real

    def eval_P(self, zp, z) -> np.ndarray:
        raise NotImplementedError

    def eval_nu(self) -> np.ndarray:
        raise NotImplementedError

    @property
    def signs(self) -> np.ndarray:
        return -np.sign(self.eval_nu()).astype(int)

    def adjoint_residual(self, zp, z) -> float:
        g = self.fibre_gram
        a = self.eval_P(zp, z)
        b = g @ self.eval_P(z, zp).conj().T @ g
        return float(np.abs(a - b).max())

    def tabulate_csv(self, path, grid: Sequence, origin=(0.0, 0.0)) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["x0", "x1"] + [f"{p}{i}{j}" for i in range(2) for j in range(2)
                                       for p in ("re", "im")])
            for zp in grid:
                m = self.eval_P(zp, origin)
                row = [float(zp[0]), float(zp[1])]
                for i in range(2):
                    for j in range(2):
                        row += [m[i, j].real, m[i, j].imag]
                w.writerow(row)


def plane_kernel(m: float, zp, z) -> np.ndarray:
    """i xi.sigma J1(m|xi|)/|xi| - J0(m|xi|) with xi = zp - z."""
    xi = np.asarray(zp, dtype=float) - np.asarray(z, dtype=float)
    r = float(np.hypot(xi[0], xi[1]))
    mr = m * r
    cliff = xi[0] * SIGMA1 + xi[1] * SIGMA2
    return 1j * m * cliff * float(bessel.j1_over_x(mr)) - bessel.j0(mr) * ID2


class PlaneProvider(KernelProvider):
    def __init__(self, m: float):
        self.m = float(m)
        self.fibre_gram = np.eye(2)

    def eval_P(self, zp, z):
        return plane_kernel(self.m, zp, z)

    def eval_nu(self):
        return np.array([-1.0, -1.0])


class ChiralProvider(KernelProvider):
    """Plane kernel sandwiched by (1 + tau Gamma), Gamma = sigma3."""

    def __init__(self, m: float, tau: float):
        if abs(abs(tau) - 1.0) < 1e-12:
            raise ValueError("tau = +-1 gives degenerate spin spaces")
        self.m = float(m)
        self.tau = float(tau)
        self.fibre_gram = np.eye(2)
        self._chi = ID2 + self.tau * SIGMA3

    def eval_P(self, zp, z):
        return self._chi @ plane_kernel(self.m, zp, z) @ self._chi

    def eval_nu(self):
        return np.array([-(1 + self.tau) ** 2, -(1 - self.tau) ** 2])


def _gl_panels(a: float, b: float, n_panels: int, order: int = 24):
    x, w = np.polynomial.legendre.leggauss(order)
    edges = np.linspace(a, b, n_panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[:-1] + edges[1:])
    nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return nodes, weights


class MinkowskiProvider(KernelProvider):
    """Regularized lower-mass-shell kernel in 1+1 dimensions.

    Coordinates are (t, x). The quadrature uses p = m sinh(u), so dp/(2 omega) = du/2.
    """

    def __init__(self, m: float, eps: float, order: int = 24, tail_tol: float = 1e-14):
        if eps <= 0:
            raise ValueError("eps must be positive, the kernel diverges otherwise")
        if m <= 0:
            raise ValueError("mass must be positive")
        self.m = float(m)
        self.eps = float(eps)
        self.order = order
        self.fibre_gram = GAMMA0.real.copy()
        # tail cut: exp(-eps m cosh U) cosh U < tail_tol
        c = 1.0
        while math.exp(-self.eps * self.m * c) * c * self.m >= tail_tol:
            c *= 1.1
        self.u_max = math.acosh(max(c, 1.0))

    def nodes(self, dt: float = 0.0, dx: float = 0.0):
        u_max = self.u_max
        rate = self.m * math.cosh(u_max) * (abs(dt) + abs(dx))
        n_panels = max(16, int(math.ceil(2 * u_max * max(rate, 1.0) / 6.0)))
        n_panels = min(n_panels, 40 * int(2 * u_max) + 16, 4000)
        # panels finer where the phase varies fastest
        return _gl_panels(-u_max, u_max, n_panels, self.order)

    def eval_P_quad(self, zp, z) -> np.ndarray:
        dt, dx = float(zp[0] - z[0]), float(zp[1] - z[1])
        u, w = self.nodes(dt, dx)
        om = self.m * np.cosh(u)
        p = self.m * np.sinh(u)
        amp = 0.5 * w * np.exp(-self.eps * om) * np.exp(1j * (om * dt + p * dx)) / (4 * np.pi ** 2)
        c0 = np.sum(amp * om)
        c1 = np.sum(amp * p)
        cm = np.sum(amp) * self.m
        return -c0 * GAMMA0 - c1 * GAMMA1 + cm * ID2

    def eval_P_closed(self, zp, z) -> np.ndarray:
        dt, dx = float(zp[0] - z[0]), float(zp[1] - z[1])
        tc = dt + 1j * self.eps
        s = tc * tc - dx * dx
        root = _continued_root(s, tc, dx)
        zarg = -1j * self.m * root
        k0, k1 = bessel.kv01(zarg)
        mat = np.array([[tc, -dx], [dx, -tc]], dtype=complex)
        return self.m / (4 * np.pi ** 2) * (k0 * ID2 - (k1 / root) * mat)

    def eval_P(self, zp, z):
        return self.eval_P_closed(zp, z)

    def eval_nu(self):
        k0, k1 = bessel.kv01(self.m * self.eps)
        pref = self.m / (4 * np.pi ** 2)
        return np.array([pref * (k0 - k1).real, pref * (k0 + k1).real])

    def eval_nu_quad(self):
        """The one-dimensional integrals over the lower mass shell."""
        u, w = self.nodes()
        om = self.m * np.cosh(u)
        base = 0.5 * w * np.exp(-self.eps * om) / (4 * np.pi ** 2)
        return np.array([np.sum(base * (self.m - om)), np.sum(base * (self.m + om))])


def _continued_root(s: complex, tc: complex, dx: float) -> complex:
    """sqrt((t + i eps)^2 - x^2) on the branch continuous from i*eps at the origin.

    Along the path (t, x) -> lambda (t, x), Im s = 2 eps t lambda keeps its sign and
    s passes through the negative real axis only when t = 0, so the root with
    positive imaginary part at t = 0 and Re root having the sign of t is the
    continuation.
    """
    r = np.sqrt(complex(s))
    t = tc.real
    if t > 0 and r.real < 0:
        r = -r
    elif t < 0 and r.real > 0:
        r = -r
    elif t == 0 and r.imag < 0:
        r = -r
    return r


def minkowski_momentum_model(m: float, eps: float, n_nodes: int = 256, u_max: float | None = None):
    """Finite momentum discretization: returns evaluation matrices E_zeta (2 x n).

    Kernel -E_zeta' E_zeta^dagger gamma0 reproduces the quadrature sum on the same nodes.
    """
    prov = MinkowskiProvider(m, eps)
    um = prov.u_max if u_max is None else u_max
    u, w = np.polynomial.legendre.leggauss(n_nodes)
    u, w = u * um, w * um
    om = m * np.cosh(u)
    p = m * np.sinh(u)
    coef = np.sqrt(0.5 * w * np.exp(-eps * om) / (4 * np.pi ** 2))
    v = np.vstack([np.sqrt(np.maximum(om - m, 0.0)), -np.sign(p) * np.sqrt(om + m)])

    def evaluation(zeta):
        t, x = zeta
        phase = np.exp(1j * (om * t + p * x))
        return v * (coef * phase)[None, :]

    return evaluation, (u, w)


def plane_evaluation(m: float, n_nodes: int, zeta, tau: float = 0.0) -> np.ndarray:
    """2 x M matrix with columns (1 + tau Gamma)(1, e^{i theta_k}) e^{-i m k.zeta}/sqrt(M)."""
    if n_nodes < 2:
        raise ValueError("need at least two circle nodes")
    th = 2 * np.pi * np.arange(n_nodes) / n_nodes
    phase = np.exp(-1j * m * (np.cos(th) * zeta[0] + np.sin(th) * zeta[1]))
    e = np.vstack([np.ones(n_nodes), np.exp(1j * th)]) * phase[None, :] / np.sqrt(n_nodes)
    if tau:
        e = np.diag([1 + tau, 1 - tau]) @ e
    return e


def plane_point(m: float, n_nodes: int, zeta, tau: float = 0.0) -> FermionPoint:
    e = plane_evaluation(m, n_nodes, zeta, tau)
    return FermionPoint(-(e.conj().T @ e), signature=SpinSignature(0, 2))


def build_euclidean_plane(m: float, n_nodes: int, coords=None, tau: float = 0.0):
    if coords is None:
        g = np.linspace(-1.0, 1.0, 5)
        coords = [(a, b) for a in g for b in g]
    samples = [Sample(tuple(map(float, c)), plane_point(m, n_nodes, c, tau), 1.0) for c in coords]
    prov = ChiralProvider(m, tau) if tau else PlaneProvider(m)
    return SampledSystem(HilbertModel(n_nodes), SpinSignature(0, 2), samples, prov)


def eval_plane_kernel(m: float, zp, z) -> np.ndarray:
    return plane_kernel(m, zp, z)


def build_minkowski(m: float, eps: float, **quad) -> MinkowskiProvider:
    return MinkowskiProvider(m, eps, **quad)


def build_chiral_plane(m: float, tau: float) -> ChiralProvider:
    return ChiralProvider(m, tau)


# --- Dirac spheres ---------------------------------------------------------

def icosphere(level: int = 3):
    """Vertices of a subdivided icosahedron and per-vertex spherical area weights."""
    t = (1 + 5 ** 0.5) / 2
    verts = [(-1, t, 0), (1, t, 0), (-1, -t, 0), (1, -t, 0), (0, -1, t), (0, 1, t),
             (0, -1, -t), (0, 1, -t), (t, 0, -1), (t, 0, 1), (-t, 0, -1), (-t, 0, 1)]
    faces = [(0, 11, 5), (0, 5, 1), (0, 1, 7), (0, 7, 10), (0, 10, 11), (1, 5, 9), (5, 11, 4),
             (11, 10, 2), (10, 7, 6), (7, 1, 8), (3, 9, 4), (3, 4, 2), (3, 2, 6), (3, 6, 8),
             (3, 8, 9), (4, 9, 5), (2, 4, 11), (6, 2, 10), (8, 6, 7), (9, 8, 1)]
    v = [np.array(p, float) / np.linalg.norm(p) for p in verts]
    for _ in range(level):
        cache = {}

        def mid(i, j):
            key = (min(i, j), max(i, j))
            if key not in cache:
                p = v[i] + v[j]
                v.append(p / np.linalg.norm(p))
                cache[key] = len(v) - 1
            return cache[key]

        new = []
        for a, b, c in faces:
            ab, bc, ca = mid(a, b), mid(b, c), mid(c, a)
            new += [(a, ab, ca), (b, bc, ab), (c, ca, bc), (ab, bc, ca)]
        faces = new
    pts = np.array(v)
    weights = np.zeros(len(pts))
    for a, b, c in faces:
        pa, pb, pc = pts[a], pts[b], pts[c]
        num = abs(np.dot(pa, np.cross(pb, pc)))
        den = 1 + np.dot(pa, pb) + np.dot(pb, pc) + np.dot(pc, pa)
        area = 2 * math.atan2(num, den)
        weights[[a, b, c]] += area / 3
    return pts, weights, np.array(faces)


def sphere_operator(p, scale: float = 2.0, shift: float = 0.0) -> np.ndarray:
    return scale * sum(pi * s for pi, s in zip(p, PAULI)) + ID2 + shift * SIGMA3


def sphere_point_from_spinors(p, scale: float = 2.0, shift: float = 0.0) -> FermionPoint:
    """Realize F(p) through local_correlation with a (1,1) fibre Gram."""
    f = sphere_operator(p, scale, shift)
    vals, vecs = np.linalg.eigh(f)
    # F = -psi^dagger G psi with G = diag(-sign(nu))
    psi = np.diag(np.sqrt(np.abs(vals))) @ vecs.conj().T
    gram = np.diag(-np.sign(vals))
    return local_correlation(psi, gram, signature=SpinSignature(1, 1))


def build_dirac_sphere(kind: str = "single", level: int = 3, tau_plus: float = 2.0,
                       tau_minus: float = 3.0) -> SampledSystem:
    pts, wts, _ = icosphere(level)
    if len(pts) == 0:
        raise ValueError("empty sphere grid")
    sig = SpinSignature(1, 1)
    samples = []
    if kind == "single":
        for p, w in zip(pts, wts):
            samples.append(Sample(tuple(p), FermionPoint(sphere_operator(p), signature=sig), w))
    elif kind == "disjoint":
        if tau_plus <= 1 or tau_minus <= 1:
            raise ValueError("disjoint spheres need tau > 1")
        for tag, tau in ((1, tau_plus), (-1, tau_minus)):
            for p, w in zip(pts, wts):
                samples.append(Sample(tuple(p) + (tag,),
                                      FermionPoint(sphere_operator(p, tau), signature=sig), w))
    elif kind == "intersecting":
        for tag in (1, -1):
            for p, w in zip(pts, wts):
                samples.append(Sample(tuple(p) + (tag,),
                                      FermionPoint(sphere_operator(p, 2.0, tag), signature=sig), w))
    else:
        raise ValueError(f"unknown sphere kind {kind!r}")
    return SampledSystem(HilbertModel(2), sig, samples)


def intersection_latitudes() -> tuple[float, float]:
    """Heights p3 where F+(p) = F-(q): 2p + e3 = 2q - e3 with |p| = |q| = 1."""
    # p1 = q1, p2 = q2, q3 = p3 + 1 and p3^2 = q3^2
    p3 = -0.5
    return p3, p3 + 1.0


# --- flat torus ------------------------------------------------------------

def torus_modes(cutoff: float) -> list:
    n = int(math.floor(math.sqrt(max(cutoff, 0.0))))
    return [(a, b) for a in range(-n, n + 1) for b in range(-n, n + 1) if a * a + b * b <= cutoff]


def build_torus_scalar(cutoff: float = 1.0, n_grid: int = 8) -> SampledSystem:
    modes = torus_modes(cutoff)
    ks = np.array(modes, dtype=float)
    g = 2 * np.pi * np.arange(n_grid) / n_grid
    samples = []
    for x in g:
        for y in g:
            psi = np.exp(1j * (ks[:, 0] * x + ks[:, 1] * y))[None, :] / (2 * np.pi)
            pt = local_correlation(psi, np.eye(1), signature=SpinSignature(0, 1))
            samples.append(Sample((x, y), pt, (2 * np.pi / n_grid) ** 2))
    return SampledSystem(HilbertModel(len(modes), tuple(modes)), SpinSignature(0, 1), samples)


# --- torus lattice -----------------------------------------------------------

def lattice_frame(x: float, y: float) -> np.ndarray:
    """Fibre values of the three wave functions (columns) at a lattice point."""
    return np.array([[1, np.exp(-1j * x), np.exp(-1j * y)],
                     [0, np.exp(-1j * x), 1j * np.exp(-1j * y)]], dtype=complex)


def lattice_point(x: float, y: float) -> FermionPoint:
    return local_correlation(lattice_frame(x, y), np.eye(2), signature=SpinSignature(0, 2))


def build_torus_lattice(kappa: float) -> SampledSystem:
    n = 2 * np.pi / kappa
    n_side = int(round(n))
    if abs(n - n_side) > 1e-9:
        raise ValueError("2 pi / kappa must be an integer")
    w = kappa ** 2 / (2 * np.pi) ** 2
    samples = []
    for i in range(n_side):
        for j in range(n_side):
            x, y = i * kappa, j * kappa
            samples.append(Sample((x, y), lattice_point(x, y), w))
    return SampledSystem(HilbertModel(3), SpinSignature(0, 2), samples)


def lattice_distance_formula(dx: float, dy: float) -> float:
    return math.sqrt(max(16 - 4 * math.cos(dx) - 4 * math.cos(dy) - 8 * math.cos(dx - dy), 0.0))


def lattice_distance_bound(dx: float, dy: float) -> float:
    return math.sqrt(24) * (abs(math.sin(dx / 2)) + abs(math.sin(dy / 2)))
