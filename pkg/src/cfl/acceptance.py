"""Acceptance checks 1-10, shared by the test suite and `cfl verify-all`.

Every criterion returns a CriterionResult made of scalar sub-checks. A
sub-check compares a measured value with a tolerance; tol_scale multiplies
every tolerance so that reporting can be exercised (tol_scale=0 fails all
upper-bound checks).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import builders as bd
from . import clifford as cf
from . import opcore as oc
from . import singular as sg
from . import spinstruct as ss
from . import tangentcone as tc
from . import topo


@dataclass
class Check:
    name: str
    value: float
    tol: float
    kind: str = "le"          # le: value <= tol, ge: value >= tol, true: value is truthy
    known_failure: bool = False

    def passed(self, tol_scale: float = 1.0) -> bool:
        if self.kind == "true":
            return bool(self.value)
        if not np.isfinite(self.value):
            return False
        if self.kind == "le":
            return self.value <= self.tol * tol_scale
        return self.value >= self.tol / tol_scale if tol_scale > 0 else False

    def describe(self, tol_scale: float = 1.0) -> str:
        mark = "ok" if self.passed(tol_scale) else "FAIL"
        if self.kind == "true":
            return f"{self.name}: {bool(self.value)} [{mark}]"
        op = "<=" if self.kind == "le" else ">="
        tol = self.tol * tol_scale if self.kind == "le" else (self.tol / tol_scale if tol_scale else math.inf)
        return f"{self.name}: {self.value:.3e} {op} {tol:.4g} [{mark}]"


@dataclass
class CriterionResult:
    number: int
    title: str
    checks: list = field(default_factory=list)
    data: dict = field(default_factory=dict)

    def passed(self, tol_scale: float = 1.0) -> bool:
        return all(c.passed(tol_scale) for c in self.checks)

    def failing(self, tol_scale: float = 1.0) -> list:
        return [c for c in self.checks if not c.passed(tol_scale)]

    def line(self, tol_scale: float = 1.0) -> str:
        status = "PASS" if self.passed(tol_scale) else "FAIL"
        extra = ""
        bad = self.failing(tol_scale)
        if bad:
            extra = " | " + "; ".join(c.describe(tol_scale) for c in bad)
        return f"criterion {self.number:2d} [{status}] {self.title}{extra}"


def fibonacci_sphere(n: int) -> np.ndarray:
    golden = np.pi * (3 - np.sqrt(5))
    i = np.arange(n)
    z = 1 - 2 * (i + 0.5) / n
    r = np.sqrt(1 - z * z)
    return np.stack([r * np.cos(golden * i), r * np.sin(golden * i), z], axis=1)


# --- 1 -----------------------------------------------------------------------

def criterion_1(n_points: int = 200) -> CriterionResult:
    res = CriterionResult(1, "Dirac sphere spectra")
    ev_err = tr_err = tr2_err = 0.0
    for p in fibonacci_sphere(n_points):
        x = bd.sphere_point_from_spinors(p)
        ev = np.sort(x.eigvals)
        ev_err = max(ev_err, float(np.max(np.abs(ev - [-1.0, 3.0]))))
        tr_err = max(tr_err, abs(np.trace(x.matrix).real - 2.0))
        tr2_err = max(tr2_err, abs(np.trace(x.matrix @ x.matrix).real - 10.0))
    res.checks += [Check("eigenvalues {3,-1}", ev_err, 1e-12),
                   Check("tr F = 2", tr_err, 1e-12),
                   Check("tr F^2 = 10", tr2_err, 1e-12)]
    return res


# --- 2 -----------------------------------------------------------------------

def multiset_distance(a, b) -> float:
    """Sup distance between equal-size multisets under the best matching."""
    from itertools import permutations
    a, b = np.asarray(a), np.asarray(b)
    if a.size == 0:
        return 0.0
    return float(min(np.max(np.abs(a - b[list(p)])) for p in permutations(range(len(b)))))


def criterion_2(n_pairs: int = 1000, seed: int = 0) -> CriterionResult:
    res = CriterionResult(2, "causal classification on the Dirac sphere")
    north = bd.sphere_point_from_spinors((0, 0, 1))
    south = bd.sphere_point_from_spinors((0, 0, -1))
    equator = bd.sphere_point_from_spinors((1, 0, 0))
    c_ns = oc.causal_classify(north, south)
    c_ne = oc.causal_classify(north, equator)
    mods = np.abs(c_ne.lambdas)
    res.checks += [Check("pole/antipole timelike", c_ns.relation == "timelike", 0, "true"),
                   Check("pole/equator spacelike", c_ne.relation == "spacelike", 0, "true"),
                   Check("pole/equator |lambda| spread", float(mods.max() - mods.min()), 1e-10)]
    rng = np.random.default_rng(seed)
    pts = rng.normal(size=(2 * n_pairs, 3))
    pts /= np.linalg.norm(pts, axis=1)[:, None]
    mism, lam_err = 0, 0.0
    for i in range(n_pairs):
        x = oc.FermionPoint(bd.sphere_operator(pts[2 * i]))
        y = oc.FermionPoint(bd.sphere_operator(pts[2 * i + 1]))
        a, b = oc.causal_classify(x, y), oc.causal_classify(y, x)
        mism += a.relation != b.relation
        if len(a.lambdas) == len(b.lambdas):
            lam_err = max(lam_err, multiset_distance(a.lambdas, b.lambdas))
        else:
            lam_err = math.inf
    res.checks += [Check("swap symmetry mismatches", mism, 0),
                   Check("swap lambda multiset error", lam_err, 1e-8)]
    return res


# --- 3 -----------------------------------------------------------------------

def criterion_3(m: float = 1.0) -> CriterionResult:
    res = CriterionResult(3, "Euclidean plane idempotence and closed chain")
    zetas = [(0.0, 0.0), (0.3, -1.2), (2.5, 0.7)]
    idem, trace = 0.0, 0.0
    for M in (2, 8, 64):
        for z in zetas:
            F = bd.plane_point(m, M, z).matrix
            idem = max(idem, float(np.max(np.abs(F @ F + F))))
            trace = max(trace, abs(np.trace(F).real + 2.0))
    res.checks += [Check("F^2 + F = 0", idem, 1e-12), Check("tr F = -2", trace, 1e-12)]
    g = np.linspace(-3.5, 3.5, 10)
    x = bd.plane_point(m, 64, (0.0, 0.0))
    err = 0.0
    for a in g:
        for b in g:
            r = m * math.hypot(a, b)
            y = bd.plane_point(m, 64, (a, b))
            A = oc.closed_chain(x, y).matrix
            c = bd.bessel.j0(r) ** 2 + bd.bessel.j1(r) ** 2
            err = max(err, float(np.max(np.abs(A - c * np.eye(2)))))
    res.checks.append(Check("closed chain = (J0^2 + J1^2) id", err, 1e-10))
    return res


# --- 4 -----------------------------------------------------------------------

def minkowski_H_operators(m: float, eps: float, n_nodes: int = 256):
    """Finite momentum model.

    Returns (op, kernel, nu): op(zeta) -> (F(zeta), E_zeta) with F = -E^dagger gamma0 E,
    kernel(z, z') = -E_z E_z'^dagger gamma0 and nu the diagonal of kernel(z, z).
    """
    ev, _ = bd.minkowski_momentum_model(m, eps, n_nodes)

    def op(z):
        E = ev(z)
        return -E.conj().T @ bd.GAMMA0 @ E, E

    def kernel(z, zp):
        return -ev(z) @ ev(zp).conj().T @ bd.GAMMA0

    nu = np.real(np.diag(kernel((0.0, 0.0), (0.0, 0.0))))
    return op, kernel, nu


def minkowski_lemma_residuals(op, kernel, nu, z, zp) -> list:
    """Residuals of the five frame identities for one pair, in the frames f = iota e / nu."""
    s = -np.sign(nu)
    Fz, Ez = op(z)
    Fp, Ep = op(zp)

    def frame(E):
        return (E.conj().T @ bd.GAMMA0) / nu[None, :]

    fz, fp = frame(Ez), frame(Ep)

    def rep(B, f_target, F_target, f_source):
        return -np.diag(s) @ f_target.conj().T @ F_target @ B @ f_source

    def image(F):
        w, v = np.linalg.eigh(F)
        keep = np.abs(w) > 1e-9 * np.abs(w).max()
        proj = v[:, keep] @ v[:, keep].conj().T
        sign = v[:, keep] @ np.diag(-np.sign(w[keep])) @ v[:, keep].conj().T
        return proj, sign

    pz, sz = image(Fz)
    pp, sp = image(Fp)
    Pzp = kernel(z, zp)
    Ppz = kernel(zp, z)
    N = np.diag(nu)
    out = [
        max(np.max(np.abs(rep(Fz, fz, Fz, fz) - N)), np.max(np.abs(rep(pz, fz, Fz, fz) - np.eye(2))),
            np.max(np.abs(rep(sz, fz, Fz, fz) - np.diag([1, -1])))),
        np.max(np.abs(rep(pp @ Fz, fp, Fp, fz) - Ppz)),
        np.max(np.abs(rep(pz @ Fp @ Fz, fz, Fz, fz) - Pzp @ Ppz)),
        np.max(np.abs(rep(pz @ sp @ Fz, fz, Fz, fz) + Pzp @ np.diag(1 / np.abs(nu)) @ Ppz)),
        np.max(np.abs(rep(pz @ pp @ Fz, fz, Fz, fz) - Pzp @ np.diag(1 / nu) @ Ppz)),
    ]
    return [float(v) for v in out]


def criterion_4(m: float = 1.0, eps: float = 0.1, seed: int = 4) -> CriterionResult:
    res = CriterionResult(4, "Minkowski kernel and frame identities")
    prov = bd.MinkowskiProvider(m, eps)
    rng = np.random.default_rng(seed)
    pts = rng.uniform(-1.5, 1.5, size=(25, 2))
    rel = 0.0
    for z in pts:
        q = prov.eval_P_quad(z, (0.0, 0.0))
        c = prov.eval_P_closed(z, (0.0, 0.0))
        rel = max(rel, float(np.max(np.abs(q - c)) / np.max(np.abs(c))))
    nu = prov.eval_nu()
    res.checks += [Check("quadrature vs closed form (relative)", rel, 1e-6),
                   Check("nu1 < 0 < nu2", bool(nu[0] < 0 < nu[1]), 0, "true")]
    op, kernel, nu_model = minkowski_H_operators(m, eps)
    worst = np.zeros(5)
    for _ in range(25):
        z, zp = rng.uniform(-1, 1, 2), rng.uniform(-1, 1, 2)
        worst = np.maximum(worst, minkowski_lemma_residuals(op, kernel, nu_model, z, zp))
    names = ["diagonal forms", "pi' zeta = P", "pi zeta' zeta = PP", "pi s' zeta = -P|N|^-1 P",
             "pi pi' zeta = P N^-1 P"]
    res.checks += [Check(f"identity {n}", float(w), 1e-8) for n, w in zip(names, worst)]
    return res


# --- 5 -----------------------------------------------------------------------

def chiral_c0(m: float, tau: float, h: float = 1e-3) -> float:
    src = tc.ProviderSource(bd.ChiralProvider(m, tau))
    D = ss.derivative(src, (0.0, 0.0), tc.ConeFunctional(tc.Kind.CHAIN), h)
    # dA(u) = c0 i (u . sigma) Gamma
    ref = [1j * bd.SIGMA1 @ bd.SIGMA3, 1j * bd.SIGMA2 @ bd.SIGMA3]
    return float(np.mean([cf.hs_inner(r, c) / cf.hs_inner(r, r) for r, c in zip(ref, D.columns)]))


def chiral_discrete_nu(m: float, tau: float, n_nodes: int = 64) -> np.ndarray:
    x = bd.plane_point(m, n_nodes, (0.3, -0.2), tau)
    return np.sort(oc.spin_space(x).eigvals)


def criterion_5(m: float = 1.0) -> CriterionResult:
    res = CriterionResult(5, "chiral plane tangent cone and spin structure")
    nu_err = 0.0
    for tau in (0.25, 0.5):
        nu = chiral_discrete_nu(m, tau)
        nu_err = max(nu_err, float(np.max(np.abs(nu - np.sort([-(1 + tau) ** 2, -(1 - tau) ** 2])))))
    res.checks.append(Check("nu = -(1 +- tau)^2", nu_err, 1e-8))
    tau = 0.5
    c0 = chiral_c0(m, tau)
    ref = 2 * m ** 3 * tau * (1 - tau ** 2)
    res.checks.append(Check("c0 relative error", abs(c0 - ref) / ref, 1e-2))
    res.data["c0"] = c0
    src = tc.ProviderSource(bd.ChiralProvider(m, tau))
    labs, w = tc.polar_neighborhood((0.0, 0.0), 0.05)
    mu = tc.estimate_cone_measure(src, (0.0, 0.0), labs, w, tc.ConeFunctional(tc.Kind.CHAIN),
                                  tc.sigma_circle_cells(16))
    best = tc.maximize_clifford(mu, cf.extension_family(kind="riemannian"))
    ang = cf.principal_angles(best.subspace.basis, [bd.SIGMA1, bd.SIGMA2])
    res.checks += [Check("maximizer angle to span(s1, s2)", float(np.max(ang)), 1e-2),
                   Check("maximizer unique", best.unique, 0, "true")]
    D = ss.derivative(src, (0.0, 0.0), tc.ConeFunctional(tc.Kind.CHAIN))
    gm = ss.gamma_map(D, best.subspace)
    sig = ss.metric_signature(gm.induced_metric)
    res.checks += [Check("gamma bijective", gm.bijective, 0, "true"),
                   Check("induced metric Riemannian (2,0)", sig == (2, 0, 0), 0, "true")]
    return res


# --- 6 -----------------------------------------------------------------------

def minkowski_cone_L(m: float = 1.0, eps: float = 0.1, half_width: float = 1e-3, n_side: int = 40,
                     n_angles: int = 32) -> dict:
    src = tc.ProviderSource(bd.MinkowskiProvider(m, eps))
    labs, w = tc.box_neighborhood((0.0, 0.0), half_width, n_side)
    mu = tc.estimate_cone_measure(src, (0.0, 0.0), labs, w,
                                  tc.ConeFunctional(tc.Kind.SIGNDIFF, tc.Part.OFFDIAG), tc.gamma_cells())
    fam = cf.extension_family(kind="causal")
    phis = np.linspace(0, np.pi, n_angles, endpoint=False)
    L = np.array([tc.L_functional(fam(p), mu) for p in phis])
    s2 = np.sin(phis) ** 2
    a = float(L @ s2 / (s2 @ s2))
    ss_res = float(np.sum((L - a * s2) ** 2))
    ss_tot = float(np.sum((L - L.mean()) ** 2))
    return {"phis": phis, "L": L, "scale": a, "r2": 1 - ss_res / ss_tot, "measure": mu}


def criterion_6(m: float = 1.0, eps: float = 0.1, seed: int = 6) -> CriterionResult:
    res = CriterionResult(6, "Minkowski spin structure and time direction")
    fit = minkowski_cone_L(m, eps)
    res.checks.append(Check("R^2 of L vs sin^2 phi", fit["r2"], 0.999, "ge"))
    res.data["L_fit"] = fit
    src = tc.ProviderSource(bd.MinkowskiProvider(m, eps))
    ac = max(float(ss.sign_derivative_anticommute(src, (0, 0), u, (1e-4,))[0])
             for u in ((0.0, 1.0), (1.0, 0.0)))
    res.checks.append(Check("{s, dA(u)} residual at h = 1e-4", ac, 1e-6))
    rng = np.random.default_rng(seed)
    anti, rel = 0.0, 0.0
    for _ in range(50):
        z, zp = rng.uniform(-0.5, 0.5, 2), rng.uniform(-0.5, 0.5, 2)
        anti = max(anti, abs(ss.E_functional(src, z, zp) + ss.E_functional(src, zp, z)))
        rel = max(rel, ss.E_closedform_check(src, z, zp)[2])
    res.checks += [Check("E antisymmetry", anti, 0.0), Check("E closed form relerr", rel, 1e-6)]
    D = ss.time_augmented_dA(src, (0.0, 0.0), 0.2)
    gm = ss.gamma_map(D, [bd.GAMMA0, bd.GAMMA2])
    res.checks.append(Check("augmented dA rank 2", gm.rank == 2, 0, "true"))
    res.data["time_coefficients"] = ss.time_coefficients(D)
    return res


# --- 7 -----------------------------------------------------------------------

def criterion_7(m: float = 1.0) -> CriterionResult:
    res = CriterionResult(7, "singular ODEs: neck, torus x S1, cone, cone x S1")
    init = np.array([0.6, 0.8j])
    drift = 0.0
    for eps in (0.1, 0.05, 0.025):
        for rhs in (sg.neck_system(1, m, eps), sg.torus_s1_system(1, 1, m, eps)):
            drift = max(drift, sg.integrate_mode(rhs, (-2.0, 2.0), init).norm_drift)
    res.checks.append(Check("neck / torus x S1 norm drift", drift, 1e-8))
    ratios = []
    for torus in (False, True):
        lad = sg.eps_ladder(1, m, [0.1, 0.05, 0.025], init, l=1 if torus else 0, torus=torus)
        ratios += list(lad["ratios"])
    res.data["eps_ratios"] = ratios
    # the sup-differences scale like sqrt(eps), i.e. ratio 1/sqrt(2) per halving
    res.checks.append(Check("eps-ladder Cauchy ratio per halving", float(max(ratios)), 0.6,
                            known_failure=True))
    pts = [(r, ph) for r in np.linspace(0.05, 5, 12) for ph in (0.3, 1.7, 4.0)]
    resid = max(sg.eigen_residual(sg.CONE_METRIC, sg.CONE_MODEL, f, 1.0, pts)
                for f in (sg.cone_spinor_plus, sg.cone_spinor_minus))
    res.checks.append(Check("conical explicit-solution residual", resid, 1e-8))
    ft = np.array([sg.cone_correlation(r, 0.4, rescale=True) for r in (1e-2, 1e-3, 1e-4)])
    lim = ft[-1]
    res.checks += [Check("rescaled F finite at r -> 0", float(np.max(np.abs(ft[-1] - ft[-2]))), 1e-4),
                   Check("rescaled F limit nonzero", float(np.linalg.norm(lim)), 0.5, "ge")]
    phis = np.linspace(0, 2 * np.pi, 12, endpoint=False)
    lims = [sg.cone_s1_limit(p) for p in phis]
    ranks = [np.linalg.matrix_rank(L, tol=1e-6) for L in lims]
    off = np.array([abs(L[0, 1]) for L in lims])
    herm = max(float(np.max(np.abs(L - L.conj().T))) for L in lims)
    res.checks += [Check("cone x S1 limit rank 2", all(r == 2 for r in ranks), 0, "true"),
                   Check("cone x S1 off-diagonal modulus spread", float(off.max() - off.min()), 1e-6),
                   Check("cone x S1 limit Hermitian", herm, 1e-6)]
    return res


# --- 8 -----------------------------------------------------------------------

def criterion_8(M: float = 1.0, m_mass: float = 0.1) -> CriterionResult:
    res = CriterionResult(8, "Schwarzschild interior")
    drift = 0.0
    for om in (0.0, 1.0):
        for lam in (1, -1):
            for k in (0.5, -0.5):
                sol = sg.schwarzschild_radial(M, sg.ModeSpec(om, lam, k, m_mass), (0.01, 1.9),
                                              init=(0.6, 0.8j))
                drift = max(drift, sol.norm_drift)
    res.checks.append(Check("|X| conservation", drift, 1e-6))
    lad = sg.continuity_ladder(M, sg.ModeSpec(1.0, 1, 0.5, m_mass))
    d = np.asarray(lad["diffs"])
    res.checks.append(Check("left-endpoint ladder Cauchy ratio", float(np.max(d[1:] / d[:-1])), 0.5))
    wp = sg.wave_packet(M, 1, m_mass, omega0=40.0)
    res.checks.append(Check("packet slope along t - u", abs(wp["slope"] - 1.0), 0.05))
    res.data["slope"] = wp["slope"]
    return res


# --- 9 -----------------------------------------------------------------------

def lattice_cloud(kappa: float = np.pi / 8) -> topo.OperatorCloud:
    sysl = bd.build_torus_lattice(kappa)
    cloud = topo.OperatorCloud.from_points(sysl.points, "hs", sysl.weights)
    cloud.coords = sysl.coords
    return cloud


def criterion_9(kappa: float = np.pi / 8) -> CriterionResult:
    res = CriterionResult(9, "torus lattice distances and topology scans")
    a0 = bd.lattice_point(0.0, 0.0).matrix
    d1 = oc.hs_norm(a0 - bd.lattice_point(math.pi, 0.0).matrix)
    d2 = oc.hs_norm(a0 - bd.lattice_point(math.pi, math.pi).matrix)
    res.checks += [Check("antipodal distance sqrt 24", abs(d1 - math.sqrt(24)), 1e-12),
                   Check("antipodal distance 4", abs(d2 - 4.0), 1e-12)]
    cloud = lattice_cloud(kappa)
    D = cloud.distances
    xy = cloud.coords
    dx = xy[:, None, 0] - xy[None, :, 0]
    dy = xy[:, None, 1] - xy[None, :, 1]
    bound = math.sqrt(24) * (np.abs(np.sin(dx / 2)) + np.abs(np.sin(dy / 2)))
    res.checks.append(Check("distance bound violation", float(np.max(D - bound)), 1e-12))
    lo, hi = topo.lattice_window(kappa)
    r_list = [0.2, 0.35, 0.45, 0.6, 0.8, lo, 1.2, 1.5, 1.8, 2.0, 2.2, 2.5]
    rows = topo.scale_scan(cloud, r_list)
    res.data["scan"] = rows
    N = len(cloud)
    first = rows[0]
    torus_in_window = [r for r in rows if r["regime"] == "torus" and lo <= r["r"] < hi]
    i_t = [i for i, r in enumerate(rows) if r["regime"] == "torus"]
    i_b = [i for i, r in enumerate(rows) if r["regime"] == "blob"]
    ordered = bool(i_t and i_b and min(i_b) > max(i_t))
    res.checks += [Check("small r discrete (N^2, 0)", first["beta0"] == N and first["beta1"] == 0, 0, "true"),
                   Check("torus regime meets the window", len(torus_in_window) > 0, 0, "true"),
                   Check("collapse after the torus regime", ordered, 0, "true")]
    dlo, dhi = topo.lattice_delta_window(kappa)
    drows = topo.delta_scan(cloud, [1.5 * dlo, 2.5 * dlo])
    res.data["delta_scan"] = drows
    res.checks.append(Check("M_delta torus inside the delta window",
                            any(r["regime"] == "torus" for r in drows), 0, "true"))
    return res


# --- 10 ----------------------------------------------------------------------

def random_riemannian_point(rng, n: int = 5, rank: int = 2) -> oc.FermionPoint:
    a = rng.normal(size=(n, rank)) + 1j * rng.normal(size=(n, rank))
    return oc.FermionPoint(-(a @ a.conj().T), signature=oc.SpinSignature(0, rank))


def random_complex(rng, n: int = 9, p_edge: float = 0.45) -> topo.NerveComplex:
    adj = np.triu(rng.random((n, n)) < p_edge, 1)
    adj = adj | adj.T
    cx = topo.flag_complex(adj)
    # random subset of the flag triangles keeps the complex downward closed
    keep = rng.random(len(cx.triangles)) < 0.7
    cx.triangles = [t for t, k in zip(cx.triangles, keep) if k]
    return cx


def random_unitary(rng, d: int = 2) -> np.ndarray:
    q, r = np.linalg.qr(rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d)))
    return q * (np.diag(r) / np.abs(np.diag(r)))[None, :]


def criterion_10(seed: int = 10) -> CriterionResult:
    res = CriterionResult(10, "property suites")
    rng = np.random.default_rng(seed)
    bad = 0
    for _ in range(1000):
        if not oc.riemannian_spectrum_check(random_riemannian_point(rng), random_riemannian_point(rng)):
            bad += 1
    res.checks.append(Check("Riemannian lambda positivity failures", bad, 0))
    worst = 0.0
    for _ in range(50):
        p = rng.normal(size=3)
        p /= np.linalg.norm(p)
        q = p + 0.1 * rng.normal(size=3)
        q /= np.linalg.norm(q)
        x, y = oc.FermionPoint(bd.sphere_operator(p)), oc.FermionPoint(bd.sphere_operator(q))
        u = oc.transport(x, y)
        worst = max(worst, oc.transport_unitarity_residual(u, oc.spin_space(y).gram))
    res.checks.append(Check("transport unitarity residual", worst, 1e-10))
    sig_bad = 0
    for _ in range(50):
        m = int(rng.integers(1, 4))
        U = random_unitary(rng)
        K = cf.check_clifford([U @ s @ U.conj().T for s in bd.PAULI[:m]])
        K = cf.random_recombination(K, rng)
        sig_bad += K.signature != (m, 0)
        ops = [bd.GAMMA0, bd.GAMMA1, bd.GAMMA2][:m]
        Kc = cf.random_recombination(cf.check_clifford(ops, bd.GAMMA0.real), rng)
        sig_bad += Kc.signature != (1, m - 1)
    res.checks.append(Check("Clifford signature violations", sig_bad, 0))
    euler_bad = 0
    for _ in range(100):
        rep = topo.betti(random_complex(rng))
        euler_bad += not rep.euler_consistent()
    res.checks.append(Check("Euler characteristic inconsistencies", euler_bad, 0))
    return res


CRITERIA: dict[int, Callable[[], CriterionResult]] = {
    1: criterion_1, 2: criterion_2, 3: criterion_3, 4: criterion_4, 5: criterion_5,
    6: criterion_6, 7: criterion_7, 8: criterion_8, 9: criterion_9, 10: criterion_10,
}


def run_all(tol_scale: float = 1.0, only=None, report: Callable[[str], None] | None = None) -> list:
    results = []
    for k, fn in CRITERIA.items():
        if only and k not in only:
            continue
        r = fn()
        results.append(r)
        if report:
            report(r.line(tol_scale))
    return results
