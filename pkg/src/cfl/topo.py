"""Topology recovery from operator point clouds: strata, nerve complexes, Betti numbers.

Complexes are flag (Rips) complexes truncated at dimension two. Homology is
over GF(2) with boundary columns stored as Python integers used as bitsets.
"""
from __future__ import annotations

import csv
import json
import math
import warnings
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .opcore import FermionPoint


# --- clouds and distances ----------------------------------------------------

@dataclass
class OperatorCloud:
    matrices: np.ndarray               # (N, n, n)
    norm: str = "sup"
    weights: np.ndarray | None = None
    ids: list | None = None
    _dist: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        self.matrices = np.asarray(self.matrices, dtype=complex)
        if self.norm not in ("sup", "hs"):
            raise ValueError("norm must be 'sup' or 'hs'")
        if self.weights is None:
            self.weights = np.full(len(self.matrices), 1.0 / max(len(self.matrices), 1))
        self.weights = np.asarray(self.weights, float)
        if self.ids is None:
            self.ids = list(range(len(self.matrices)))

    @classmethod
    def from_points(cls, points: Sequence[FermionPoint], norm: str = "sup", weights=None):
        return cls(np.array([p.matrix for p in points]), norm, weights)

    def __len__(self) -> int:
        return len(self.matrices)

    @property
    def distances(self) -> np.ndarray:
        if self._dist is None:
            self._dist = distance_matrix(self.matrices, self.norm)
        return self._dist


def distance_matrix(mats: np.ndarray, norm: str = "sup") -> np.ndarray:
    mats = np.asarray(mats, complex)
    n = len(mats)
    D = np.zeros((n, n))
    for i in range(n - 1):
        diff = mats[i + 1:] - mats[i]
        if norm == "hs":
            d = np.sqrt(np.sum(np.abs(diff) ** 2, axis=(1, 2)))
        else:
            d = np.max(np.abs(np.linalg.eigvalsh(diff)), axis=1)
        D[i, i + 1:] = d
        D[i + 1:, i] = d
    return D


def strata(cloud: OperatorCloud, rank_tol: float | None = None) -> dict:
    """Partition point indices by the signature (p, q) of each operator."""
    out: dict = {}
    for i, m in enumerate(cloud.matrices):
        ev = np.linalg.eigvalsh(m)
        tol = rank_tol if rank_tol is not None else 1e-9 * max(np.abs(ev).max(), 1e-300)
        key = (int(np.sum(ev > tol)), int(np.sum(ev < -tol)))
        out.setdefault(key, []).append(i)
    return out


# --- complexes ---------------------------------------------------------------

@dataclass
class NerveComplex:
    n_vertices: int
    edges: list
    triangles: list
    scale: float = float("nan")

    def is_downward_closed(self) -> bool:
        es = set(self.edges)
        return all((a, b) in es and (a, c) in es and (b, c) in es for a, b, c in self.triangles)

    def to_json(self) -> str:
        return json.dumps({"n_vertices": self.n_vertices, "scale": self.scale,
                           "edges": self.edges, "triangles": self.triangles})

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["kind", "a", "b", "c"])
            for a, b in self.edges:
                w.writerow(["edge", a, b, ""])
            for a, b, c in self.triangles:
                w.writerow(["triangle", a, b, c])


def flag_complex(adj: np.ndarray, scale: float = float("nan"), triangles: bool = True) -> NerveComplex:
    adj = np.asarray(adj, bool).copy()
    np.fill_diagonal(adj, False)
    n = len(adj)
    ii, jj = np.nonzero(np.triu(adj, 1))
    edges = list(zip(ii.tolist(), jj.tolist()))
    tris = []
    if triangles:
        upper = np.triu(adj, 1)
        for i in range(n):
            nb = np.nonzero(upper[i])[0]
            for j in nb:
                ks = np.nonzero(upper[i] & upper[j])[0]
                tris.extend((i, int(j), int(k)) for k in ks)
    return NerveComplex(n, edges, tris, scale)


def m_r_complex(cloud: OperatorCloud, r: float, triangles: bool = True) -> NerveComplex:
    """Rips rule: edge iff d(x, y) < 2r; triangles whenever all three edges are present."""
    return flag_complex(cloud.distances < 2 * r, r, triangles)


def r_delta(cloud: OperatorCloud, x: int, delta: float, weights=None) -> float:
    """sup { r : rho(B_r(x)) < delta } with open balls.

    The sup is attained at a neighbour distance: the largest sorted distance d_j
    whose open ball (points strictly closer, including x itself) weighs < delta.
    """
    w = cloud.weights if weights is None else np.asarray(weights, float)
    total = float(np.sum(w))
    if delta >= total:
        warnings.warn("delta >= total measure: r_delta is infinite", stacklevel=2)
        return math.inf
    d = cloud.distances[x]
    order = np.argsort(d, kind="stable")
    ds, ws = d[order], w[order]
    # weight strictly inside the ball of radius ds[j] (ties excluded)
    cum = np.concatenate([[0.0], np.cumsum(ws)])
    inside = cum[np.searchsorted(ds, ds, side="left")]
    ok = inside < delta
    return float(ds[ok].max()) if np.any(ok) else 0.0


def m_delta_complex(cloud: OperatorCloud, delta: float, triangles: bool = True) -> NerveComplex:
    radii = np.array([r_delta(cloud, i, delta) for i in range(len(cloud))])
    adj = cloud.distances < radii[:, None] + radii[None, :]
    return flag_complex(adj, delta, triangles)


# --- homology ----------------------------------------------------------------

@dataclass
class BettiReport:
    beta0: int
    beta1: int
    rank_d1: int
    rank_d2: int
    beta2_skeleton: int
    n_vertices: int
    n_edges: int
    n_triangles: int

    def euler_consistent(self) -> bool:
        chi = self.n_vertices - self.n_edges + self.n_triangles
        return chi == self.beta0 - self.beta1 + self.beta2_skeleton


def gf2_rank(columns: Iterable[int], stop_at: int | None = None) -> int:
    """Rank over GF(2) of integer bitset columns; optionally stop once rank hits stop_at."""
    pivots: dict = {}
    rank = 0
    for v in columns:
        while v:
            p = v.bit_length() - 1
            if p in pivots:
                v ^= pivots[p]
            else:
                pivots[p] = v
                rank += 1
                break
        if stop_at is not None and rank >= stop_at:
            break
    return rank


def betti(cx: NerveComplex) -> BettiReport:
    eidx = {e: i for i, e in enumerate(cx.edges)}
    d1 = [(1 << a) | (1 << b) for a, b in cx.edges]
    r1 = gf2_rank(d1)
    d2 = [(1 << eidx[(a, b)]) | (1 << eidx[(a, c)]) | (1 << eidx[(b, c)]) for a, b, c in cx.triangles]
    # rank d2 cannot exceed dim ker d1; stop early once the cycle space is filled
    r2 = gf2_rank(d2, stop_at=len(cx.edges) - r1)
    nv, ne, nt = cx.n_vertices, len(cx.edges), len(cx.triangles)
    return BettiReport(nv - r1, ne - r1 - r2, r1, r2, nt - r2, nv, ne, nt)


def strong_collapse(adj: np.ndarray) -> np.ndarray:
    """Remove dominated vertices until none is left; returns the kept vertex indices.

    v is dominated by w when the closed neighbourhood of v lies inside that of
    w. Removing v preserves the homotopy type of the flag complex.
    """
    adj = np.asarray(adj, bool).copy()
    np.fill_diagonal(adj, True)
    alive = np.ones(len(adj), bool)
    changed = True
    while changed:
        changed = False
        for v in np.nonzero(alive)[0]:
            nv = adj[v] & alive
            cand = np.nonzero(nv)[0]
            cand = cand[cand != v]
            if cand.size == 0:
                continue
            # closed neighbourhood of v contained in that of w
            sub = adj[np.ix_(cand, nv.nonzero()[0])]
            if np.any(np.all(sub, axis=1)):
                alive[v] = False
                changed = True
    return np.nonzero(alive)[0]


def _flag_triangle_columns(upper: np.ndarray, eidx: dict):
    """Boundary bitsets of the flag triangles, generated lazily."""
    for i in range(len(upper)):
        for j in np.nonzero(upper[i])[0]:
            j = int(j)
            for k in np.nonzero(upper[i] & upper[j])[0]:
                k = int(k)
                yield (1 << eidx[(i, j)]) | (1 << eidx[(i, k)]) | (1 << eidx[(j, k)])


def flag_betti(adj: np.ndarray) -> tuple[int, int]:
    """(beta0, beta1) of the flag complex of a graph, after strong collapse.

    Triangles are streamed and elimination stops once they span the cycle
    space, so dense graphs that resist collapse never materialize all triangles.
    """
    adj = np.asarray(adj, bool)
    keep = strong_collapse(adj)
    sub = adj[np.ix_(keep, keep)].copy()
    np.fill_diagonal(sub, False)
    upper = np.triu(sub, 1)
    ii, jj = np.nonzero(upper)
    edges = list(zip(ii.tolist(), jj.tolist()))
    eidx = {e: n for n, e in enumerate(edges)}
    r1 = gf2_rank([(1 << a) | (1 << b) for a, b in edges])
    cycles = len(edges) - r1
    r2 = gf2_rank(_flag_triangle_columns(upper, eidx), stop_at=cycles) if cycles else 0
    return len(keep) - r1, cycles - r2


# --- scans -------------------------------------------------------------------

def regime_label(beta0: int, beta1: int, n_points: int, n_edges: int) -> str:
    if n_edges == 0 or beta0 == n_points:
        return "discrete"
    if beta0 == 1 and beta1 == 2:
        return "torus"
    if beta0 == 1 and beta1 == 0:
        return "blob"
    return "other"


def scale_scan(cloud: OperatorCloud, r_list: Sequence[float]) -> list:
    rows = []
    D = cloud.distances
    for r in r_list:
        adj = D < 2 * r
        np.fill_diagonal(adj, False)
        ne = int(np.sum(adj) // 2)
        b0, b1 = flag_betti(adj)
        rows.append({"r": float(r), "beta0": b0, "beta1": b1, "edges": ne,
                     "regime": regime_label(b0, b1, len(cloud), ne)})
    return rows


def delta_scan(cloud: OperatorCloud, deltas: Sequence[float]) -> list:
    rows = []
    D = cloud.distances
    for delta in deltas:
        radii = np.array([r_delta(cloud, i, delta) for i in range(len(cloud))])
        adj = D < radii[:, None] + radii[None, :]
        np.fill_diagonal(adj, False)
        ne = int(np.sum(adj) // 2)
        b0, b1 = flag_betti(adj)
        rows.append({"delta": float(delta), "beta0": b0, "beta1": b1, "edges": ne,
                     "regime": regime_label(b0, b1, len(cloud), ne)})
    return rows


def write_scan_csv(rows: list, path) -> None:
    if not rows:
        return
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=list(rows[0].keys()))
        w.writeheader()
        w.writerows(rows)


def lattice_window(kappa: float) -> tuple[float, float]:
    """Intermediate r window in which the lattice nerve is a torus."""
    return math.sqrt(24) * math.sin(kappa / 2), 2.0


def lattice_delta_window(kappa: float) -> tuple[float, float]:
    return 5 * kappa ** 2 / (4 * math.pi ** 2), 0.5
