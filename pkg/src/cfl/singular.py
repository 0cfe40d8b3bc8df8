"""Dirac operators for diagonal metrics and separated Dirac ODEs on singular spaces.

All separated equations are linear systems y' = A(t) y. Generators are
evaluated in one vectorized call on the RK4 nodes; the stepping loop then only
does small matrix products, optionally over a batch of modes.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.integrate import cumulative_trapezoid

from .builders import ID2, SIGMA1, SIGMA2, SIGMA3

DEFAULT_STEPS = 2 ** 14


# --- Dirac coefficients ------------------------------------------------------

@dataclass
class DiagonalMetric:
    """ds^2 = sum_i s_i g_i(x) dx_i^2 with g_i > 0."""
    signs: tuple
    coeffs: Callable[[np.ndarray], Sequence[float]]
    name: str = ""

    @property
    def k(self) -> int:
        return len(self.signs)

    def __call__(self, point) -> np.ndarray:
        g = np.asarray(self.coeffs(np.asarray(point, float)), dtype=float)
        if g.shape != (self.k,):
            raise ValueError(f"metric returned {g.shape}, expected ({self.k},)")
        if np.any(~np.isfinite(g)) or np.any(g <= 0):
            raise ValueError(f"metric coefficients must be positive, got {g} at {point}")
        return g


@dataclass
class DiracCoefficients:
    G: list
    B: np.ndarray
    anticommute_residual: float
    skew_residual: float


def _model_at(model, point) -> list:
    mats = model(np.asarray(point, float)) if callable(model) else model
    return [np.asarray(m, dtype=complex) for m in mats]


def _G(metric: DiagonalMetric, model, point) -> list:
    g = metric(point)
    return [m / np.sqrt(gi) for m, gi in zip(_model_at(model, point), g)]


# fourth-order central stencil
_STENCIL = ((-2, 1 / 12), (-1, -8 / 12), (1, 8 / 12), (2, -1 / 12))


def dirac_coefficients(metric: DiagonalMetric, point, model, spin_gram=None,
                       h: float = 1e-4) -> DiracCoefficients:
    """G^j = g_j^{-1/2} model_j and B = (i / 2 sqrt|det g|) d_j (sqrt|det g| G^j).

    model is a list of matrices with {m_i, m_j} = 2 s_i delta_ij, or a callable
    of the point returning such a list (rotating frames).
    """
    p = np.asarray(point, float)
    G = _G(metric, model, p)
    d = G[0].shape[0]
    g = metric(p)
    res = 0.0
    for i in range(metric.k):
        for j in range(metric.k):
            target = 2 * metric.signs[i] / g[i] * np.eye(d) if i == j else 0
            res = max(res, float(np.max(np.abs(G[i] @ G[j] + G[j] @ G[i] - target))))
    div = np.zeros((d, d), complex)
    for j in range(metric.k):
        for off, w in _STENCIL:
            q = p.copy()
            q[j] += off * h
            vol = np.sqrt(np.prod(metric(q)))
            div += w / h * vol * _G(metric, model, q)[j]
    B = 1j / (2 * np.sqrt(np.prod(g))) * div
    sg = np.eye(d) if spin_gram is None else np.asarray(spin_gram, complex)
    skew = float(np.max(np.abs(sg @ B + (sg @ B).conj().T)))
    return DiracCoefficients(G, B, res, skew)


def dirac_apply(metric: DiagonalMetric, model, psi: Callable, point, h: float = 1e-3) -> np.ndarray:
    """(i G^j d_j + B) psi at point, derivatives by fourth-order central differences."""
    p = np.asarray(point, float)
    coeffs = dirac_coefficients(metric, p, model)
    out = coeffs.B @ psi(p)
    for j in range(metric.k):
        dpsi = 0
        for off, w in _STENCIL:
            q = p.copy()
            q[j] += off * h
            dpsi = dpsi + w / h * psi(q)
        out = out + 1j * coeffs.G[j] @ dpsi
    return out


def eigen_residual(metric, model, psi: Callable, lam: float, points, h: float = 1e-3) -> float:
    """max |(D - lam) psi| / |psi| over points.

    The step shrinks with the first (radial) coordinate below 1.
    """
    worst = 0.0
    for p in points:
        v = psi(np.asarray(p, float))
        r = dirac_apply(metric, model, psi, p, h * min(1.0, abs(p[0]))) - lam * v
        worst = max(worst, float(np.linalg.norm(r) / np.linalg.norm(v)))
    return worst


def polar_frame(point) -> list:
    """(sigma^r, sigma^phi) for a point whose second coordinate is the angle."""
    ph = point[1]
    sr = np.cos(ph) * SIGMA1 + np.sin(ph) * SIGMA2
    sphi = -np.sin(ph) * SIGMA1 + np.cos(ph) * SIGMA2
    return [sr, sphi]


def polar_metric(R: Callable, S: Callable | None = None) -> DiagonalMetric:
    """dr^2 + R(r)^2 dphi^2 (+ S(r)^2 dalpha^2)."""
    if S is None:
        return DiagonalMetric((1, 1), lambda p: (1.0, R(p[0]) ** 2), "polar")
    return DiagonalMetric((1, 1, 1), lambda p: (1.0, R(p[0]) ** 2, S(p[0]) ** 2), "polar_s1")


def polar_model(with_circle: bool = False) -> Callable:
    if with_circle:
        return lambda p: polar_frame(p) + [SIGMA3]
    return polar_frame


def neck_metric(eps: float) -> DiagonalMetric:
    """dt^2 - R(t)^2 dphi^2 with R = (t^2 + eps^2)^(1/4)."""
    return DiagonalMetric((1, -1), lambda p: (1.0, np.sqrt(p[0] ** 2 + eps ** 2)), "neck")


NECK_MODEL = [SIGMA3, 1j * SIGMA1]


# --- integrator --------------------------------------------------------------

@dataclass
class RadialSolution:
    grid: np.ndarray
    values: np.ndarray                 # (n_nodes, *batch, 2)
    norm_log: np.ndarray
    rescale_power: float = 0.0
    anti_hermitian: bool = False
    halving_diff: float | None = None

    @property
    def norm_drift(self) -> float:
        return float(np.max(np.abs(self.norm_log - self.norm_log[0])))

    def to_csv(self, path) -> None:
        vals = self.values.reshape(len(self.grid), -1, self.values.shape[-1])
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            head = ["x"]
            for b in range(vals.shape[1]):
                for c in range(vals.shape[2]):
                    head += [f"re{b}_{c}", f"im{b}_{c}"]
            w.writerow(head + ["norm"])
            norms = self.norm_log.reshape(len(self.grid), -1)
            for i, x in enumerate(self.grid):
                row = [x]
                for z in vals[i].ravel():
                    row += [z.real, z.imag]
                w.writerow(row + [norms[i, 0]])


def _eval_generator(rhs, ts: np.ndarray) -> np.ndarray:
    out = np.asarray(rhs(ts))
    if out.ndim >= 3 and out.shape[0] == len(ts):
        return out.astype(complex)
    return np.array([rhs(t) for t in ts], dtype=complex)


def _rk4(A: np.ndarray, y0: np.ndarray, h: float) -> np.ndarray:
    """A holds the generator at t0, t0+h/2, t0+h, ... (2*steps+1 nodes)."""
    steps = (len(A) - 1) // 2
    out = np.empty((steps + 1,) + y0.shape, complex)
    y = y0.astype(complex)
    out[0] = y

    def mul(m, v):
        return np.matmul(m, v[..., None])[..., 0]

    for n in range(steps):
        a0, a1, a2 = A[2 * n], A[2 * n + 1], A[2 * n + 2]
        k1 = mul(a0, y)
        k2 = mul(a1, y + 0.5 * h * k1)
        k3 = mul(a1, y + 0.5 * h * k2)
        k4 = mul(a2, y + h * k3)
        y = y + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        out[n + 1] = y
    return out


def integrate_mode(rhs: Callable, interval, init, steps: int = DEFAULT_STEPS,
                   check_halving: bool = False) -> RadialSolution:
    """Fixed-step RK4 for y' = A(t) y with a norm log.

    rhs(ts) may return (len(ts), *batch, d, d) for a vector of times, or a
    single (d, d) matrix for a scalar time. The interval may run backwards.
    """
    a, b = float(interval[0]), float(interval[1])
    if a == b:
        raise ValueError("empty interval")
    ts = np.linspace(a, b, 2 * steps + 1)
    A = _eval_generator(rhs, ts)
    if not np.all(np.isfinite(A)):
        raise ValueError("generator not finite on the interval")
    h = (b - a) / steps
    vals = _rk4(A, np.asarray(init, complex), h)
    probe = A[:: max(1, len(A) // 16)]
    skew = np.max(np.abs(probe + np.swapaxes(probe, -1, -2).conj()))
    anti = bool(skew <= 1e-12 * max(1.0, float(np.max(np.abs(probe)))))
    sol = RadialSolution(ts[::2], vals, np.linalg.norm(vals, axis=-1), 0.0, anti)
    if check_halving:
        coarse = _rk4(A[::2], np.asarray(init, complex), 2 * h)
        sol.halving_diff = float(np.max(np.abs(coarse - vals[::2])))
    return sol


# --- neck and torus x S^1 ----------------------------------------------------

def neck_radius(eps: float) -> Callable:
    return lambda t: (np.asarray(t, float) ** 2 + eps ** 2) ** 0.25


def neck_system(k: float, m: float, eps: float, l: float = 0.0, torus: bool = False) -> Callable:
    """Generator -i H(t) of i chi' = H chi for the neck or the torus x S^1 (S = 1/R)."""
    R = neck_radius(eps)

    def rhs(t):
        t = np.atleast_1d(np.asarray(t, float))
        r = R(t)
        off = -k / r
        H = np.zeros((len(t), 2, 2), complex)
        H[:, 0, 0] = m
        H[:, 1, 1] = -m
        if torus:
            S = 1 / r
            H[:, 0, 1] = off + 1j * l / S
            H[:, 1, 0] = off - 1j * l / S
        else:
            H[:, 0, 1] = off
            H[:, 1, 0] = off
        return -1j * H
    return rhs


def torus_s1_system(k: float, l: float, m: float, eps: float) -> Callable:
    return neck_system(k, m, eps, l=l, torus=True)


def gronwall_bound(k: float, m: float, eps: float, ts: np.ndarray, norm: float,
                   l: float = 0.0) -> np.ndarray:
    """2 |chi| int_{t0}^{t} (m + |k|/R + |l|/S) dt along ts."""
    r = neck_radius(eps)(ts)
    integrand = m + abs(k) / r + abs(l) * r
    return 2 * norm * cumulative_trapezoid(integrand, ts, initial=0.0)


def gronwall_check(sol: RadialSolution, k: float, m: float, eps: float, l: float = 0.0) -> float:
    """Smallest slack bound - |chi(t) - chi(t0)|; nonnegative when respected."""
    diff = np.linalg.norm(sol.values - sol.values[0], axis=-1)
    bound = gronwall_bound(k, m, eps, sol.grid, float(sol.norm_log[0]), l)
    return float(np.min(bound - diff))


def eps_ladder(k: float, m: float, eps_list: Sequence[float], init, interval=(-2.0, 2.0),
               l: float = 0.0, torus: bool = False, steps: int = DEFAULT_STEPS) -> dict:
    """Sup-differences of solutions for successive eps and their ratios."""
    sols = [integrate_mode(neck_system(k, m, e, l, torus), interval, init, steps) for e in eps_list]
    diffs = np.array([np.max(np.abs(sols[i].values - sols[i + 1].values))
                      for i in range(len(sols) - 1)])
    ratios = diffs[1:] / diffs[:-1]
    return {"eps": list(eps_list), "sup_diffs": diffs, "ratios": ratios, "solutions": sols}


def neck_correlation(chis: np.ndarray, ks: Sequence[float], t: float, phi: float,
                     eps: float) -> np.ndarray:
    """F_ij = -< psi_i | sigma3 psi_j > with psi = e^{ik phi} (chi1, i chi2) / sqrt(R)."""
    r = float(neck_radius(eps)(t))
    psis = np.array([np.exp(1j * kk * phi) * np.array([c[0], 1j * c[1]]) / np.sqrt(r)
                     for c, kk in zip(chis, ks)])
    return -psis.conj() @ SIGMA3 @ psis.T


# --- conical surface ---------------------------------------------------------

def cone_system(lam: float, k_half: float, R: Callable = lambda r: r / 2) -> Callable:
    """Generator of chi' = [[k/R, lam], [-lam, -k/R]] chi."""
    def rhs(r):
        r = np.atleast_1d(np.asarray(r, float))
        a = k_half / R(r)
        out = np.zeros((len(r), 2, 2), complex)
        out[:, 0, 0] = a
        out[:, 1, 1] = -a
        out[:, 0, 1] = lam
        out[:, 1, 0] = -lam
        return out
    return rhs


def cone_radial_explicit(r, lam: int = 1, k_half: float = 0.5) -> np.ndarray:
    """Closed-form radial solutions for lam = +-1, k = +-1/2 on the cone R = r/2."""
    r = np.asarray(r, float)
    s = np.sin(r)
    w = (s - r * np.cos(r)) / r
    if abs(lam) != 1 or abs(k_half) != 0.5:
        raise ValueError("explicit radial solutions only for lam = +-1, k = +-1/2")
    if k_half > 0:
        return np.stack([s, -lam * w], axis=-1)
    return np.stack([lam * w, s], axis=-1)


def cone_spinor_plus(p) -> np.ndarray:
    r, ph = p[0], p[1]
    return np.array([r * np.sin(r), -1j * np.exp(1j * ph) * (np.sin(r) - r * np.cos(r))]) / r ** 1.5


def cone_spinor_minus(p) -> np.ndarray:
    r, ph = p[0], p[1]
    return np.array([np.exp(-1j * ph) * (np.sin(r) - r * np.cos(r)), 1j * r * np.sin(r)]) / r ** 1.5


def cone_spinor_third(p) -> np.ndarray:
    """The k = 3/2 solution; the lower component carries one extra power of 1/r."""
    r, ph = p[0], p[1]
    return np.array([
        np.exp(1j * ph) * (3 * r * np.cos(r) - (3 - r ** 2) * np.sin(r)),
        1j * np.exp(2j * ph) * (3 * (5 - 2 * r ** 2) * np.sin(r) - (15 * r - r ** 3) * np.cos(r)) / r,
    ]) / r ** 2.5


CONE_METRIC = polar_metric(lambda r: r / 2)
CONE_MODEL = polar_model()


def cone_F_formula(r):
    r = np.asarray(r, float)
    return -(np.sin(r) ** 2 / r + (np.sin(r) - r * np.cos(r)) ** 2 / r ** 3)


def correlation_from_spinors(psis: Sequence[np.ndarray], spin_gram=ID2) -> np.ndarray:
    P = np.array(psis)
    return -P.conj() @ np.asarray(spin_gram) @ P.T


def cone_correlation(r: float, phi: float, third: bool = False, rescale: bool = False) -> np.ndarray:
    fns = [cone_spinor_plus, cone_spinor_minus] + ([cone_spinor_third] if third else [])
    F = correlation_from_spinors([f((r, phi)) for f in fns])
    return rescale_correlation(F, 1 / r) if rescale else F


def cone_rescaled_limit() -> float:
    """Scalar limit of F/r at r -> 0 from the Taylor expansion of the closed form."""
    # sin^2 r / r^2 -> 1 and (sin r - r cos r)^2 / r^4 = r^2/9 + ... -> 0
    return -1.0


# --- cone x S^1 --------------------------------------------------------------

def cone_s1_plus(p) -> np.ndarray:
    r, ph, al = p
    return np.exp(1j * al) / r ** 2 * np.array([
        (1 - 2 * r) * np.sin(r) - r * np.cos(r),
        1j * np.exp(1j * ph) * ((2 + r) * np.sin(r) - 2 * r * np.cos(r))])


def cone_s1_minus(p) -> np.ndarray:
    r, ph, al = p
    return np.exp(1j * al) / r ** 2 * np.array([
        np.exp(-1j * ph) * ((2 - r) * np.sin(r) - 2 * r * np.cos(r)),
        1j * ((1 + 2 * r) * np.sin(r) - r * np.cos(r))])


CONE_S1_METRIC = polar_metric(lambda r: 5 * r / 6, lambda r: 5 * r / 4)
CONE_S1_MODEL = polar_model(with_circle=True)


def cone_s1_correlation(r: float, phi: float, alpha: float = 0.0) -> np.ndarray:
    return correlation_from_spinors([cone_s1_plus((r, phi, alpha)), cone_s1_minus((r, phi, alpha))])


def cone_s1_limit(phi: float, r_ladder: Sequence[float] = (4e-3, 2e-3, 1e-3)) -> np.ndarray:
    """Limit r -> 0 of the cone x S^1 correlation by polynomial extrapolation in r."""
    rs = np.asarray(r_ladder, float)
    Fs = np.array([cone_s1_correlation(r, phi) for r in rs])
    V = np.vander(rs, len(rs))
    coef = np.linalg.solve(V, Fs.reshape(len(rs), -1))
    return coef[-1].reshape(2, 2)


def cone_s1_limit_exact(phi: float) -> np.ndarray:
    return -np.array([[5, 4 * np.exp(-1j * phi)], [4 * np.exp(1j * phi), 5]])


# --- conformal rescaling -----------------------------------------------------

def conformal_rescale(values, f, k_dim: int):
    """f^((k-1)/2) psi."""
    return np.asarray(values) * np.asarray(f, float) ** ((k_dim - 1) / 2)


def rescale_correlation(F, factor: float) -> np.ndarray:
    if factor <= 0:
        raise ValueError("rescaling factor must be positive")
    return factor * np.asarray(F)


# --- Schwarzschild interior --------------------------------------------------

@dataclass
class ModeSpec:
    omega: float
    lam: int
    k_half: float
    m_mass: float = 0.0
    l: int | None = None

    def __post_init__(self):
        if int(self.lam) != self.lam or self.lam == 0:
            raise ValueError("separation constant lambda must be a nonzero integer")
        if abs(self.k_half * 2 - round(self.k_half * 2)) > 1e-12 or round(2 * self.k_half) % 2 == 0:
            raise ValueError("k must be a half-odd integer")
        if abs(self.k_half) > abs(self.lam) - 0.5 + 1e-12:
            raise ValueError(f"k = {self.k_half} outside the range |k| <= |lambda| - 1/2")


def regge_wheeler(r, M: float = 1.0):
    r = np.asarray(r, float)
    return r + 2 * M * np.log(np.abs(r - 2 * M))


def horizon_cap(M: float) -> float:
    return 2 * M * (1 - 1e-3)


def _validate_interval(M: float, a: float, b: float) -> None:
    lo, hi = min(a, b), max(a, b)
    if lo <= 0 or hi >= 2 * M:
        raise ValueError("interval must lie strictly inside (0, 2M)")


def schwarzschild_system(M: float, omegas, lam: float, m_mass: float) -> Callable:
    """Generator of dX/ds in s = sqrt(r); batch over an array of omegas."""
    omegas = np.atleast_1d(np.asarray(omegas, float))

    def rhs(s):
        s = np.atleast_1d(np.asarray(s, float))
        r = s * s
        absd = r * (2 * M - r)
        out = np.zeros((len(s), len(omegas), 2, 2), complex)
        diag = 2 * s[:, None] * 1j * omegas[None, :] * (r * r / absd)[:, None]
        out[:, :, 0, 0] = diag
        out[:, :, 1, 1] = -diag
        # 2 s / sqrt(|Delta|) = 2 / sqrt(2M - r) is bounded at r = 0
        c = (2 / np.sqrt(2 * M - r))[:, None]
        out[:, :, 0, 1] = c * (lam - 1j * m_mass * r)[:, None]
        out[:, :, 1, 0] = c * (-lam - 1j * m_mass * r)[:, None]
        return out
    return rhs


def schwarzschild_radial(M: float, mode: ModeSpec, r_interval=(0.01, 1.9), init=(1.0, 0.0),
                         steps: int = DEFAULT_STEPS, check_halving: bool = False) -> RadialSolution:
    """Integrate the radial system from r_interval[0] to r_interval[1] in s = sqrt(r)."""
    a, b = map(float, r_interval)
    _validate_interval(M, a, b)
    rhs = schwarzschild_system(M, [mode.omega], mode.lam, mode.m_mass)
    init = np.asarray(init, complex).reshape(1, 2)
    sol = integrate_mode(rhs, (np.sqrt(a), np.sqrt(b)), init, steps, check_halving)
    sol.grid = sol.grid ** 2
    sol.values = sol.values[:, 0, :]
    sol.norm_log = sol.norm_log[:, 0]
    return sol


def continuity_ladder(M: float, mode: ModeSpec, r_right: float = 1.0, init=(1.0, 0.0),
                      lefts: Sequence[float] = (1e-2, 1e-4, 1e-6, 1e-8),
                      steps: int = DEFAULT_STEPS) -> dict:
    """Values X(r_left) for shrinking left endpoints, integrated from r_right."""
    rhs = schwarzschild_system(M, [mode.omega], mode.lam, mode.m_mass)
    vals = []
    for rl in lefts:
        _validate_interval(M, rl, r_right)
        sol = integrate_mode(rhs, (np.sqrt(r_right), np.sqrt(rl)),
                             np.asarray(init, complex).reshape(1, 2), steps)
        vals.append(sol.values[-1, 0])
    vals = np.array(vals)
    diffs = np.linalg.norm(np.diff(vals, axis=0), axis=-1)
    return {"lefts": list(lefts), "values": vals, "diffs": diffs}


def schwarzschild_correlation(Xa, Xb, r, M: float, Y=(1 / np.sqrt(2), 1 / np.sqrt(2))):
    """-r^(3/2) <Psi_a | Psi_b> for separated spinors at one angle (phases dropped).

    X = (X_+, X_-), Y = (Y_-, Y_+); the fibre product pairs the upper and lower
    halves of the four-spinor.
    """
    r = np.asarray(r, float)

    def four(X):
        X = np.asarray(X)
        xp, xm = X[..., 0], X[..., 1]
        return np.stack([xm * Y[0], xp * Y[1], xp * Y[0], xm * Y[1]], axis=-1)

    pa, pb = four(Xa), four(Xb)
    prod = (np.sum(pa[..., :2].conj() * pb[..., 2:], axis=-1)
            + np.sum(pa[..., 2:].conj() * pb[..., :2], axis=-1))
    absd = r * (2 * M - r)
    return -r ** 1.5 * prod / (r * np.sqrt(absd))


def wave_packet(M: float = 1.0, lam: int = 1, m_mass: float = 0.1, omega0: float = 40.0,
                width: float = 2.0, n_omega: int = 81, component: int = 1,
                r_start: float = 0.05, r_end: float = 1.9, steps: int = 2 ** 16,
                r_eval: Sequence[float] | None = None, t_grid: np.ndarray | None = None) -> dict:
    """Gaussian superposition in omega of radial solutions launched in one component.

    component 1 (X_-) should travel along t - u = const, component 0 along t + u.
    Returns centroids in t for each evaluation radius and the fitted slope dt/du.
    """
    _validate_interval(M, r_start, r_end)
    omegas = omega0 + width * np.linspace(-4, 4, n_omega)
    amp = np.exp(-0.5 * ((omegas - omega0) / width) ** 2)
    amp /= np.sqrt(np.sum(amp ** 2))
    u0 = float(regge_wheeler(r_start, M))
    sgn = 1 if component == 1 else -1
    init = np.zeros((n_omega, 2), complex)
    init[:, component] = np.exp(1j * sgn * omegas * u0)
    rhs = schwarzschild_system(M, omegas, lam, m_mass)
    sol = integrate_mode(rhs, (np.sqrt(r_start), np.sqrt(r_end)), init, steps)
    r_nodes = sol.grid ** 2
    if r_eval is None:
        r_eval = np.linspace(0.2, 1.8, 17)
    if t_grid is None:
        t_grid = np.linspace(-8, 8, 2001)
    phase = np.exp(-1j * np.outer(t_grid, omegas))
    cents, us = [], []
    for re in r_eval:
        i = int(np.argmin(np.abs(r_nodes - re)))
        x = sol.values[i, :, component]
        packet = phase @ (amp * x)
        dens = np.abs(packet) ** 2
        cents.append(float(np.sum(t_grid * dens) / np.sum(dens)))
        us.append(float(regge_wheeler(r_nodes[i], M)))
    us, cents = np.array(us), np.array(cents)
    slope, intercept = np.polyfit(us, cents, 1)
    return {"u": us, "centroid": cents, "slope": float(slope), "intercept": float(intercept),
            "norm_drift": float(np.max(np.abs(sol.norm_log - sol.norm_log[0])))}
