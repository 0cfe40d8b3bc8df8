"""Tangent cone measures, L-functionals and selection of tangential Clifford subspaces.

A kernel source supplies, for two sample labels, the kernel matrices in the
pseudo-orthonormal frames and the eigenvalues nu; it covers both analytic
providers and explicit sampled fermion systems.
"""
from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import minimize_scalar, minimize
from scipy.spatial import cKDTree

from . import opcore
from .builders import GAMMA0, GAMMA1, GAMMA2, ID2, SIGMA1, SIGMA2, SIGMA3, KernelProvider
from .clifford import (CliffordSubspace, ExtensionFamily, hs_inner, orthonormalize, project,
                       grassmann_distance)


class Kind(str, Enum):
    CHAIN = "Chain"
    SIGNDIFF = "SignDiff"
    PROJDIFF = "ProjDiff"


class Part(str, Enum):
    FULL = "full"
    DIAG = "diag"
    OFFDIAG = "offdiag"


@dataclass(frozen=True)
class ConeFunctional:
    kind: Kind = Kind.CHAIN
    part: Part = Part.FULL


@dataclass(frozen=True)
class ConeWindow:
    alpha: float
    beta: float

    def __post_init__(self):
        if not 0 <= self.alpha < self.beta:
            raise ValueError("window needs 0 <= alpha < beta")


class IsolatedPointError(ValueError):
    pass


# --- kernel sources ----------------------------------------------------------

class ProviderSource:
    """Labels are coordinates; kernels come from a translation-invariant provider.

    orientation=-1 reverses the time coordinate of the labels (first component).
    """

    def __init__(self, provider: KernelProvider, orientation: int = 1):
        self.provider = provider
        self.orientation = orientation
        self._nu = np.asarray(provider.eval_nu(), dtype=float)

    def _phys(self, c):
        c = np.asarray(c, dtype=float)
        return np.array([self.orientation * c[0], *c[1:]])

    def nu(self, c) -> np.ndarray:
        return self._nu

    def signs(self, c) -> np.ndarray:
        return -np.sign(self._nu).astype(int)

    def P(self, target, source) -> np.ndarray:
        return self.provider.eval_P(self._phys(target), self._phys(source))

    def op_distance(self, a, b, norm: str = "sup") -> float:
        """Norm of F(a) - F(b) on the Hilbert model via the 4x4 Gram realization."""
        g = np.asarray(self.provider.fibre_gram, dtype=float)
        ginv = np.linalg.inv(g)
        paa, pab = self.P(a, a), self.P(a, b)
        pba, pbb = self.P(b, a), self.P(b, b)
        gram = -np.block([[g @ paa, g @ pab], [g @ pba, g @ pbb]])
        d = np.block([[-ginv, np.zeros((2, 2))], [np.zeros((2, 2)), ginv]])
        ev = np.linalg.eigvals(d @ gram).real
        if norm == "sup":
            return float(np.abs(ev).max())
        return float(np.sqrt(np.sum(ev ** 2)))


class PointSource:
    """Labels index the points of a sampled system."""

    def __init__(self, points: Sequence[opcore.FermionPoint]):
        self.points = list(points)
        self._spaces = {}

    def space(self, i) -> opcore.SpinSpace:
        if i not in self._spaces:
            self._spaces[i] = opcore.spin_space(self.points[i])
        return self._spaces[i]

    def nu(self, i):
        return self.space(i).eigvals

    def signs(self, i):
        return self.space(i).signs

    def P(self, target, source):
        return opcore.kernel(self.points[target], self.points[source],
                             self.space(target), self.space(source)).matrix

    def op_distance(self, a, b, norm: str = "sup") -> float:
        diff = self.points[a].matrix - self.points[b].matrix
        return opcore.sup_norm(diff) if norm == "sup" else opcore.hs_norm(diff)


def _split(a: np.ndarray, signs: np.ndarray, part: Part) -> np.ndarray:
    if part == Part.FULL:
        return a
    same = signs[:, None] == signs[None, :]
    mask = same if part == Part.DIAG else ~same
    return np.where(mask, a, 0)


def eval_A(f: ConeFunctional, source, x, y) -> np.ndarray:
    """Cone functional at y, as a matrix on S_x in the pseudo-orthonormal frame."""
    nx = np.diag(source.nu(x))
    ny = source.nu(y)
    a = source.P(x, y)
    b = source.P(y, x)
    if f.kind == Kind.CHAIN:
        out = a @ b - nx @ nx
    elif f.kind == Kind.SIGNDIFF:
        out = -a @ np.diag(1 / np.abs(ny)) @ b + np.abs(nx)
    elif f.kind == Kind.PROJDIFF:
        out = a @ np.diag(1 / ny) @ b - nx
    else:
        raise ValueError(f"unknown functional {f.kind}")
    return _split(out, source.signs(x), f.part)


# --- conical cells -----------------------------------------------------------

@dataclass
class CellSet:
    centers: list
    labels: list

    def assign(self, dirs: np.ndarray) -> np.ndarray:
        """Nearest centre (HS distance) for unit directions, shape (n, d, d)."""
        c = np.array(self.centers)
        # maximize Re Tr(C^dagger D)
        sims = np.einsum("kij,nij->nk", c.conj(), dirs).real
        return np.argmax(sims, axis=1)


def basis_cells(basis: Sequence[np.ndarray], names: Sequence[str] | None = None) -> CellSet:
    on = orthonormalize(basis)
    names = names or [f"b{i}" for i in range(len(on))]
    centers, labels = [], []
    for q, n in zip(on, names):
        centers += [q, -q]
        labels += [f"+{n}", f"-{n}"]
    return CellSet(centers, labels)


def gamma_cells() -> CellSet:
    return basis_cells([ID2, GAMMA0, GAMMA1, GAMMA2], ["1", "g0", "g1", "g2"])


def circle_cells(b1, b2, n_angles: int = 16, extra: Sequence[np.ndarray] = (),
                 extra_names: Sequence[str] = ()) -> CellSet:
    q1, q2 = orthonormalize([b1, b2])
    ph = 2 * np.pi * np.arange(n_angles) / n_angles
    centers = [np.cos(p) * q1 + np.sin(p) * q2 for p in ph]
    labels = [f"phi={p:.4f}" for p in ph]
    if len(extra):
        ex = basis_cells(extra, list(extra_names) or None)
        centers += ex.centers
        labels += ex.labels
    return CellSet(centers, labels)


def sigma_circle_cells(n_angles: int = 16) -> CellSet:
    return circle_cells(SIGMA1, SIGMA2, n_angles, [ID2, SIGMA3], ["1", "s3"])


@dataclass
class ConeMeasureEstimate:
    directions: list
    weights: np.ndarray
    delta_ladder: np.ndarray
    cells: CellSet
    delta_used: np.ndarray
    normalized: bool = False
    raw_total: float = 0.0

    @property
    def total(self) -> float:
        return float(np.sum(self.weights))

    def support(self, tol: float = 1e-12) -> list:
        return [d for d, w in zip(self.directions, self.weights) if w > tol]

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            dim = self.directions[0].shape[0] if self.directions else 0
            head = ["cell", "weight", "delta"]
            head += [f"{p}{i}{j}" for i in range(dim) for j in range(dim) for p in ("re", "im")]
            w.writerow(head)
            for lab, d, wt, dl in zip(self.cells.labels, self.directions, self.weights,
                                       self.delta_used):
                row = [lab, wt, dl]
                for z in d.ravel():
                    row += [z.real, z.imag]
                w.writerow(row)


def empty_estimate(cells: CellSet) -> ConeMeasureEstimate:
    k = len(cells.centers)
    return ConeMeasureEstimate(list(cells.centers), np.zeros(k), np.zeros(0), cells, np.zeros(k))


def estimate_cone_measure(source, x, labels: Sequence, weights: Sequence[float],
                          f: ConeFunctional, cells: CellSet, window: ConeWindow | None = None,
                          ladder_factor: float = 0.5, rungs: int = 6, ladder_scale: float = 10.0,
                          min_count: int | None = None, norm: str = "sup",
                          zero_tol: float = 1e-13) -> ConeMeasureEstimate:
    """Limsup surrogate of the tangent cone measure at x from weighted samples.

    For each cell the weight is the max over a geometric delta ladder of
    mu(B_delta intersect cell) / mu(B_delta); the ball is taken in the image
    space of the functional with the Hilbert-Schmidt norm.
    """
    labels = list(labels)
    weights = np.asarray(weights, dtype=float)
    if len(labels) <= 1:
        return empty_estimate(cells)
    vals = np.array([eval_A(f, source, x, y) for y in labels])
    norms = np.sqrt(np.sum(np.abs(vals) ** 2, axis=(1, 2)))
    scale = max(norms.max(), 1e-300)
    nonzero = norms > zero_tol * scale
    if window is not None:
        keep = np.zeros(len(labels), bool)
        for i, y in enumerate(labels):
            if not nonzero[i]:
                continue
            dist = source.op_distance(x, y, norm)
            keep[i] = dist ** window.beta < norms[i] < dist ** window.alpha
        nonzero &= keep
    if not np.any(nonzero):
        raise IsolatedPointError("point isolated at this scale")
    flat = vals[nonzero].reshape(int(nonzero.sum()), -1)
    feats = np.hstack([flat.real, flat.imag])
    if len(feats) > 1:
        dist, _ = cKDTree(feats).query(feats, k=2)
        nn = float(np.median(dist[:, 1]))
    else:
        nn = float(norms[nonzero][0])
    if nn <= 0:
        nn = float(np.median(norms[nonzero]))
    ladder = ladder_scale * nn * ladder_factor ** np.arange(rungs)
    dirs = vals[nonzero] / norms[nonzero][:, None, None]
    cell_idx = cells.assign(dirs)
    k = len(cells.centers)
    if min_count is None:
        min_count = max(8, 2 * k)
    w_nz = weights[nonzero]
    n_nz = norms[nonzero]
    # degenerate images (e.g. strips) have tiny nearest-neighbour gaps: grow the
    # ladder until its top rung holds enough samples
    min_count = min(min_count, len(n_nz))
    while np.sum(n_nz < ladder[0]) < min_count:
        ladder = ladder * 2.0
    best = np.zeros(k)
    used = np.zeros(k)
    any_rung = False
    for delta in ladder:
        in_ball_all = norms < delta
        denom = float(np.sum(weights[in_ball_all]))
        inside = n_nz < delta
        if inside.sum() < min_count or denom <= 0:
            continue
        any_rung = True
        frac = np.bincount(cell_idx[inside], weights=w_nz[inside], minlength=k) / denom
        upd = frac > best
        best = np.where(upd, frac, best)
        used = np.where(upd, delta, used)
    if not any_rung:
        raise IsolatedPointError("no ladder rung contains enough samples")
    # mean direction per cell
    directions = []
    for j in range(k):
        sel = cell_idx == j
        if np.any(sel):
            m = np.einsum("n,nij->ij", w_nz[sel], dirs[sel])
            nm = np.sqrt(hs_inner(m, m))
            directions.append(m / nm if nm > 0 else cells.centers[j])
        else:
            directions.append(cells.centers[j])
    raw = float(best.sum())
    normalized = raw > 1 + 1e-9
    if normalized:
        best = best / raw
    return ConeMeasureEstimate(directions, best, ladder, cells, used, normalized, raw)


def uniform_sphere_measure(basis: Sequence[np.ndarray], n: int = 400) -> ConeMeasureEstimate:
    """Synthetic measure: uniform weights on well-spread unit directions in span(basis)."""
    on = orthonormalize(basis)
    golden = np.pi * (3 - np.sqrt(5))
    dirs = []
    for i in range(n):
        z = 1 - 2 * (i + 0.5) / n
        r = np.sqrt(max(0.0, 1 - z * z))
        v = (r * np.cos(golden * i), r * np.sin(golden * i), z)
        dirs.append(sum(c * q for c, q in zip(v, on)))
    cells = CellSet(dirs, [f"u{i}" for i in range(n)])
    return ConeMeasureEstimate(dirs, np.full(n, 1.0 / n), np.zeros(0), cells, np.zeros(n))


# --- L functional and maximization -------------------------------------------

def L_functional(U: CliffordSubspace | Sequence[np.ndarray], mu: ConeMeasureEstimate,
                 restrict_ac=None) -> float:
    basis = U.basis if isinstance(U, CliffordSubspace) else list(U)
    on = orthonormalize(basis)
    ac_on = None
    if restrict_ac is not None:
        from .clifford import ac_space
        ac_on, _, _ = ac_space(sign=restrict_ac)
    total = 0.0
    for d, w in zip(mu.directions, mu.weights):
        if w <= 0:
            continue
        e = d if ac_on is None else project(ac_on, d)
        pe = project(on, e)
        total += w * hs_inner(pe, pe)
    return float(total)


@dataclass
class MaximizerResult:
    subspace: CliffordSubspace
    value: float
    unique: bool
    parameter: object
    landscape: tuple


def maximize_clifford(mu: ConeMeasureEstimate, family: ExtensionFamily, n_grid: int = 64,
                      separation_tol: float = 1e-3, restrict_ac=None) -> MaximizerResult:
    params = family.sample_parameters(n_grid if family.parameter_dim == 1 else 4 * n_grid)
    values = np.array([L_functional(family(p), mu, restrict_ac) for p in params])
    vmax, vmin = values.max(), values.min()
    if family.parameter_dim == 1:
        n = len(values)
        peaks = [i for i in range(n) if values[i] >= values[i - 1] and values[i] >= values[(i + 1) % n]]
        i0 = int(np.argmax(values))
        step = np.pi / n
        res = minimize_scalar(lambda t: -L_functional(family(t), mu, restrict_ac),
                              bounds=(params[i0] - step, params[i0] + step), method="bounded",
                              options={"xatol": 1e-10})
        best_p = float(res.x) % np.pi
        best_v = -float(res.fun)
    else:
        pts = np.array(params)
        # antipodal identification: nu and -nu give the same subspace
        sims = np.abs(pts @ pts.T)
        np.fill_diagonal(sims, -1)
        nbrs = np.argsort(-sims, axis=1)[:, :8]
        peaks = [i for i in range(len(values)) if np.all(values[i] >= values[nbrs[i]])]
        i0 = int(np.argmax(values))

        def neg(ang):
            th, ph = ang
            v = np.array([np.sin(th) * np.cos(ph), np.sin(th) * np.sin(ph), np.cos(th)])
            return -L_functional(family(v), mu, restrict_ac)

        p0 = pts[i0]
        ang0 = [np.arccos(np.clip(p0[2], -1, 1)), np.arctan2(p0[1], p0[0])]
        res = minimize(neg, ang0, method="Nelder-Mead", options={"xatol": 1e-8, "fatol": 1e-13})
        th, ph = res.x
        best_p = np.array([np.sin(th) * np.cos(ph), np.sin(th) * np.sin(ph), np.cos(th)])
        best_v = -float(res.fun)
    K = family(best_p)
    if vmax - vmin < separation_tol:
        unique = False
    else:
        # basins = local maxima grouped by subspace distance
        basins = []
        for i in sorted(peaks, key=lambda j: -values[j]):
            Ki = family(params[i])
            for b in basins:
                if grassmann_distance(b[0].basis, Ki.basis) < 0.3:
                    break
            else:
                basins.append((Ki, values[i]))
        second = basins[1][1] if len(basins) > 1 else -np.inf
        unique = bool(second < vmax - separation_tol)
    return MaximizerResult(K, best_v, unique, best_p, (params, values))


def tangential_section(source, f: ConeFunctional, family: ExtensionFamily, points: Sequence,
                       neighborhood: Callable, cells: CellSet, adjacency: Sequence | None = None,
                       **kw) -> dict:
    """Per-point maximizers and the max Grassmann distance between adjacent points.

    neighborhood(x) returns (labels, weights) of the samples around x.
    """
    section = []
    for x in points:
        labs, wts = neighborhood(x)
        mu = estimate_cone_measure(source, x, labs, wts, f, cells, **kw)
        res = maximize_clifford(mu, family)
        if not res.unique:
            return {"section": section, "aborted": True, "degenerate_at": x, "gap": np.nan}
        section.append(res.subspace)
    if adjacency is None:
        adjacency = [(i, i + 1) for i in range(len(points) - 1)]
    gap = max((grassmann_distance(section[i].basis, section[j].basis) for i, j in adjacency),
              default=0.0)
    return {"section": section, "aborted": False, "degenerate_at": None, "gap": float(gap)}


def window_anticommute_check(mu: ConeMeasureEstimate, sign, window: ConeWindow | None = None) -> float:
    if window is not None and window.beta >= 2:
        warnings.warn("window with beta >= 2: anticommutation check skipped", stacklevel=2)
        return float("nan")
    s = np.asarray(sign, dtype=complex)
    res = 0.0
    for d in mu.support():
        res = max(res, float(np.linalg.norm(s @ d + d @ s)))
    return res


# --- sampling helpers --------------------------------------------------------

def polar_neighborhood(center, radius: float, n_rings: int = 24, n_angles: int = 64,
                       offset: float = 0.5):
    """Polar sample grid around center with Lebesgue weights; includes the centre."""
    c = np.asarray(center, float)
    h = radius / n_rings
    labels = [tuple(c)]
    weights = [0.0]
    for j in range(n_rings):
        r = (j + 0.5) * h
        for k in range(n_angles):
            th = 2 * np.pi * (k + offset) / n_angles
            labels.append((c[0] + r * np.cos(th), c[1] + r * np.sin(th)))
            weights.append(r * h * 2 * np.pi / n_angles)
    return labels, np.array(weights)


def box_neighborhood(center, half_width: float, n_side: int = 40):
    """Cartesian grid centred on center. An even n_side keeps the centre lines out."""
    c = np.asarray(center, float)
    g = np.linspace(-half_width, half_width, n_side)
    h = g[1] - g[0]
    labels = [(c[0] + a, c[1] + b) for a in g for b in g]
    return labels, np.full(len(labels), h * h)
