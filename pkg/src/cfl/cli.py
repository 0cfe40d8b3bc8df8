"""Command line scenario runner.

    cfl <scenario> [--config file.toml] [--out dir] [--seed n] [--plot-data]
    cfl run file.toml
    cfl list
    cfl verify-all [--only 1,2] [--tol-scale s]

Exit codes: 0 ok, 2 configuration error or unknown scenario, 3 parameter
validation failure, 4 numerical check failure.
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

EXIT_OK, EXIT_CONFIG, EXIT_PARAMS, EXIT_NUMERIC = 0, 2, 3, 4
_THREAD_VARS = ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS")


def _cap_threads() -> None:
    n = os.environ.get("CFL_THREADS")
    if n:
        for var in _THREAD_VARS:
            os.environ[var] = n


# thread caps only take effect if set before numpy loads
_cap_threads()

import numpy as np  # noqa: E402

try:  # Python 3.11+
    import tomllib
except ModuleNotFoundError:  # pragma: no cover
    import tomli as tomllib

from . import acceptance as acc  # noqa: E402
from . import builders as bd  # noqa: E402
from . import clifford as cf  # noqa: E402
from . import opcore as oc  # noqa: E402
from . import singular as sg  # noqa: E402
from . import spinstruct as ss  # noqa: E402
from . import tangentcone as tc  # noqa: E402
from . import topo  # noqa: E402


class ConfigError(Exception):
    pass


class ParamError(Exception):
    pass


@dataclass
class Output:
    tables: dict = field(default_factory=dict)     # name -> list of row dicts
    documents: dict = field(default_factory=dict)  # name -> JSON-serializable object
    plots: dict = field(default_factory=dict)      # name -> (x, y) columns
    checks: list = field(default_factory=list)
    summary: dict = field(default_factory=dict)


@dataclass
class Scenario:
    name: str
    description: str
    defaults: dict
    run: Callable[[dict, np.random.Generator], Output]


SCENARIOS: dict[str, Scenario] = {}


def scenario(name: str, description: str, **defaults):
    def wrap(fn):
        SCENARIOS[name] = Scenario(name, description, defaults, fn)
        return fn
    return wrap


def validate_params(sc: Scenario, given: dict) -> dict:
    unknown = set(given) - set(sc.defaults)
    if unknown:
        raise ParamError(f"unknown parameter(s) for {sc.name}: {sorted(unknown)}")
    out = dict(sc.defaults)
    for key, val in given.items():
        ref = sc.defaults[key]
        if isinstance(ref, bool):
            ok = isinstance(val, bool)
        elif isinstance(ref, int):
            ok = isinstance(val, int) and not isinstance(val, bool)
        elif isinstance(ref, float):
            ok = isinstance(val, (int, float)) and not isinstance(val, bool)
            val = float(val) if ok else val
        elif isinstance(ref, list):
            ok = isinstance(val, list) and all(isinstance(v, (int, float)) for v in val)
        else:
            ok = isinstance(val, type(ref))
        if not ok:
            raise ParamError(f"{sc.name}.{key}: expected {type(ref).__name__}, got {val!r}")
        out[key] = val
    return out


def _positive(params: dict, *keys) -> None:
    for k in keys:
        if not params[k] > 0:
            raise ParamError(f"{k} must be positive")


# --- scenarios ---------------------------------------------------------------

@scenario("sphere", "Dirac sphere: local correlation spectra on a Fibonacci point set",
          n_points=200, scale=2.0, shift=0.0)
def run_sphere(p, rng) -> Output:
    _positive(p, "n_points")
    out = Output()
    rows = []
    for i, x in enumerate(acc.fibonacci_sphere(p["n_points"])):
        F = bd.sphere_point_from_spinors(x, p["scale"], p["shift"])
        ev = np.sort(F.eigvals)
        rows.append({"index": i, "x": x[0], "y": x[1], "z": x[2], "ev_min": ev[0], "ev_max": ev[-1],
                     "trace": np.trace(F.matrix).real, "trace_sq": np.trace(F.matrix @ F.matrix).real})
    out.tables["eigenvalues"] = rows
    out.plots["eigenvalues"] = ([r["z"] for r in rows], [r["ev_max"] for r in rows])
    if p["scale"] == 2.0 and p["shift"] == 0.0:
        err = max(max(abs(r["ev_min"] + 1), abs(r["ev_max"] - 3)) for r in rows)
        out.checks.append(acc.Check("eigenvalues {3,-1}", err, 1e-12))
    return out


@scenario("plane", "Euclidean or chiral plane: idempotence and the closed chain on a grid",
          m=1.0, n_nodes=64, tau=0.0, half_width=3.5, n_grid=10)
def run_plane(p, rng) -> Output:
    _positive(p, "m", "n_nodes", "n_grid")
    if p["n_nodes"] < 2:
        raise ParamError("n_nodes must be at least 2")
    out = Output()
    g = np.linspace(-p["half_width"], p["half_width"], p["n_grid"])
    x = bd.plane_point(p["m"], p["n_nodes"], (0.0, 0.0), p["tau"])
    rows = []
    for a in g:
        for b in g:
            y = bd.plane_point(p["m"], p["n_nodes"], (a, b), p["tau"])
            A = oc.closed_chain(x, y).matrix
            r = p["m"] * math.hypot(a, b)
            rows.append({"xi0": a, "xi1": b, "r": r, "chain_00": A[0, 0].real,
                         "chain_11": A[1, 1].real, "offdiag": abs(A[0, 1]),
                         "bessel": bd.bessel.j0(r) ** 2 + bd.bessel.j1(r) ** 2})
    out.tables["closed_chain"] = rows
    out.plots["closed_chain"] = ([r["r"] for r in rows], [r["chain_00"] for r in rows])
    F = x.matrix
    if p["tau"] == 0.0:
        out.checks.append(acc.Check("F^2 + F = 0", float(np.max(np.abs(F @ F + F))), 1e-12))
        err = max(max(abs(r["chain_00"] - r["bessel"]), abs(r["chain_11"] - r["bessel"]), r["offdiag"])
                  for r in rows)
        out.checks.append(acc.Check("closed chain = (J0^2 + J1^2) id", err, 1e-10))
    out.summary["spin_eigenvalues"] = np.sort(oc.spin_space(x).eigvals).tolist()
    return out


@scenario("minkowski", "Minkowski kernel: quadrature vs closed form, nu, frame identities",
          m=1.0, eps=0.1, n_points=25, extent=1.5)
def run_minkowski(p, rng) -> Output:
    _positive(p, "m", "eps", "n_points")
    out = Output()
    prov = bd.MinkowskiProvider(p["m"], p["eps"])
    rows = []
    for z in rng.uniform(-p["extent"], p["extent"], size=(p["n_points"], 2)):
        q = prov.eval_P_quad(z, (0.0, 0.0))
        c = prov.eval_P_closed(z, (0.0, 0.0))
        rows.append({"t": z[0], "x": z[1], "rel_err": float(np.max(np.abs(q - c)) / np.max(np.abs(c))),
                     **{f"P{i}{j}_re": c[i, j].real for i in range(2) for j in range(2)},
                     **{f"P{i}{j}_im": c[i, j].imag for i in range(2) for j in range(2)}})
    out.tables["kernel"] = rows
    nu = prov.eval_nu()
    out.summary["nu"] = [float(v) for v in nu]
    op, kernel, nu_model = acc.minkowski_H_operators(p["m"], p["eps"])
    worst = np.zeros(5)
    for _ in range(p["n_points"]):
        z, zp = rng.uniform(-1, 1, 2), rng.uniform(-1, 1, 2)
        worst = np.maximum(worst, acc.minkowski_lemma_residuals(op, kernel, nu_model, z, zp))
    out.tables["identities"] = [{"identity": i + 1, "residual": float(w)} for i, w in enumerate(worst)]
    out.checks += [acc.Check("quadrature vs closed form", max(r["rel_err"] for r in rows), 1e-6),
                   acc.Check("nu1 < 0 < nu2", bool(nu[0] < 0 < nu[1]), 0, "true"),
                   acc.Check("frame identities", float(worst.max()), 1e-8)]
    ts = np.linspace(-p["extent"], p["extent"], 61)
    out.plots["kernel_t"] = (ts.tolist(), [float(np.abs(prov.eval_P((t, 0.0), (0.0, 0.0))).max())
                                           for t in ts])
    return out


@scenario("chiral", "Chiral plane: nu, c0 fit and spin structure", m=1.0, tau=0.5)
def run_chiral(p, rng) -> Output:
    _positive(p, "m")
    if not 0 < p["tau"] < 1:
        raise ParamError("tau must lie in (0, 1)")
    out = Output()
    nu = acc.chiral_discrete_nu(p["m"], p["tau"])
    c0 = acc.chiral_c0(p["m"], p["tau"])
    src = tc.ProviderSource(bd.ChiralProvider(p["m"], p["tau"]))
    D = ss.derivative(src, (0.0, 0.0), tc.ConeFunctional(tc.Kind.CHAIN))
    gm = ss.gamma_map(D, [bd.SIGMA1, bd.SIGMA2])
    out.summary.update(nu=nu.tolist(), c0=c0, c0_formula=2 * p["m"] * p["tau"] * (1 - p["tau"] ** 2),
                       gamma_rank=gm.rank, induced_metric=gm.induced_metric.tolist(),
                       signature=list(ss.metric_signature(gm.induced_metric)))
    out.tables["gamma_map"] = [{"axis": i, **{f"c{j}": v for j, v in enumerate(row)}}
                               for i, row in enumerate(gm.coefficients)]
    ref = np.sort([-(1 + p["tau"]) ** 2, -(1 - p["tau"]) ** 2])
    out.checks += [acc.Check("nu = -(1 +- tau)^2", float(np.max(np.abs(nu - ref))), 1e-8),
                   acc.Check("gamma bijective", gm.bijective, 0, "true")]
    return out


def _cone_setup(p):
    if p["system"] == "chiral":
        src = tc.ProviderSource(bd.ChiralProvider(p["m"], p["tau"]))
        labs, w = tc.polar_neighborhood((0.0, 0.0), p["radius"])
        return src, labs, w, tc.ConeFunctional(tc.Kind.CHAIN), tc.sigma_circle_cells(16), \
            cf.extension_family(kind="riemannian")
    if p["system"] == "minkowski":
        src = tc.ProviderSource(bd.MinkowskiProvider(p["m"], p["eps"]))
        labs, w = tc.box_neighborhood((0.0, 0.0), p["radius"], 40)
        return src, labs, w, tc.ConeFunctional(tc.Kind.SIGNDIFF, tc.Part.OFFDIAG), tc.gamma_cells(), \
            cf.extension_family(kind="causal")
    raise ParamError("system must be 'chiral' or 'minkowski'")


@scenario("cone-measure", "Tangent cone measure and the Clifford maximizer",
          system="minkowski", m=1.0, eps=0.1, tau=0.5, radius=1e-3)
def run_cone_measure(p, rng) -> Output:
    _positive(p, "m", "eps", "radius")
    out = Output()
    src, labs, w, f, cells, fam = _cone_setup(p)
    mu = tc.estimate_cone_measure(src, (0.0, 0.0), labs, w, f, cells)
    out.tables["measure"] = [{"cell": lab, "weight": float(wt)} for lab, wt in zip(mu.cells.labels, mu.weights)]
    best = tc.maximize_clifford(mu, fam)
    params_, values = best.landscape
    params_ = np.asarray(params_, float)
    if params_.ndim == 1:
        out.tables["landscape"] = [{"parameter": a, "L": b} for a, b in zip(params_, values)]
        out.plots["landscape"] = (params_.tolist(), np.asarray(values).tolist())
    else:
        out.tables["landscape"] = [{"nu_x": a[0], "nu_y": a[1], "nu_z": a[2], "L": b}
                                   for a, b in zip(params_, values)]
    out.summary.update(max_value=float(best.value), unique=bool(best.unique),
                       parameter=None if best.parameter is None else np.asarray(best.parameter).tolist())
    out.documents["maximizer"] = {"basis": [_mat(b) for b in best.subspace.basis],
                                  "gram": np.asarray(best.subspace.gram).tolist()}
    return out


@scenario("spin-structure", "Minkowski spin structure: dA, E functional, time augmentation",
          m=1.0, eps=0.1, delta=0.2, n_pairs=50)
def run_spin_structure(p, rng) -> Output:
    _positive(p, "m", "eps", "delta", "n_pairs")
    out = Output()
    src = tc.ProviderSource(bd.MinkowskiProvider(p["m"], p["eps"]))
    D = ss.derivative(src, (0.0, 0.0))
    plain = ss.gamma_map(D, [bd.GAMMA0, bd.GAMMA2])
    Dt = ss.time_augmented_dA(src, (0.0, 0.0), p["delta"])
    aug = ss.gamma_map(Dt, [bd.GAMMA0, bd.GAMMA2])
    fit = ss.E_cubic_fit(src)
    rows, rel = [], 0.0
    for _ in range(p["n_pairs"]):
        z, zp = rng.uniform(-0.5, 0.5, 2), rng.uniform(-0.5, 0.5, 2)
        lhs, rhs, e = ss.E_closedform_check(src, z, zp)
        rel = max(rel, e)
        rows.append({"t": z[0], "x": z[1], "tp": zp[0], "xp": zp[1], "E": lhs, "closed_form": rhs, "relerr": e})
    out.tables["E_pairs"] = rows
    out.tables["gamma_augmented"] = [{"axis": i, "c_gamma0": r[0], "c_gamma2": r[1]}
                                     for i, r in enumerate(aug.coefficients)]
    out.summary.update(rank_plain=plain.rank, rank_augmented=aug.rank,
                       signature=list(ss.metric_signature(aug.induced_metric)),
                       time_coefficients=ss.time_coefficients(Dt),
                       E_cubic={k: float(v) for k, v in fit.items()})
    out.checks += [acc.Check("E closed form relerr", rel, 1e-6),
                   acc.Check("augmented rank 2", aug.rank == 2, 0, "true")]
    return out


def _mode_output(sol: sg.RadialSolution, name: str, tol: float = 1e-8) -> Output:
    out = Output()
    vals = sol.values.reshape(len(sol.grid), -1)
    out.tables[name] = [{"x": float(x), **{f"re{j}": float(v.real) for j, v in enumerate(row)},
                         **{f"im{j}": float(v.imag) for j, v in enumerate(row)},
                         "norm": float(np.ravel(n)[0])}
                        for x, row, n in zip(sol.grid[::16], vals[::16], sol.norm_log[::16])]
    out.plots[name] = (sol.grid[::16].tolist(), [float(np.ravel(n)[0]) for n in sol.norm_log[::16]])
    out.summary["norm_drift"] = sol.norm_drift
    out.checks.append(acc.Check("norm drift", sol.norm_drift, tol))
    return out


@scenario("neck", "Neck geometry mode: norm conservation and the eps ladder",
          k=1.0, m=1.0, eps=0.1, t_min=-2.0, t_max=2.0, steps=16384, ladder=[0.1, 0.05, 0.025])
def run_neck(p, rng) -> Output:
    _positive(p, "eps", "steps")
    sol = sg.integrate_mode(sg.neck_system(p["k"], p["m"], p["eps"]), (p["t_min"], p["t_max"]),
                            [0.6, 0.8j], p["steps"])
    out = _mode_output(sol, "mode")
    out.summary["gronwall_min_slack"] = sg.gronwall_check(sol, p["k"], p["m"], p["eps"])
    lad = sg.eps_ladder(p["k"], p["m"], p["ladder"], [0.6, 0.8j], (p["t_min"], p["t_max"]))
    out.summary["eps_ladder"] = {"sup_diffs": list(map(float, lad["sup_diffs"])),
                                 "ratios": list(map(float, lad["ratios"]))}
    return out


@scenario("torus-s1", "Torus x S1 mode: norm conservation", k=1.0, l=1.0, m=1.0, eps=0.1,
          t_min=-2.0, t_max=2.0, steps=16384)
def run_torus_s1(p, rng) -> Output:
    _positive(p, "eps", "steps")
    sol = sg.integrate_mode(sg.torus_s1_system(p["k"], p["l"], p["m"], p["eps"]),
                            (p["t_min"], p["t_max"]), [0.6, 0.8j], p["steps"])
    return _mode_output(sol, "mode")


@scenario("cone", "Conical singularity: explicit spinors and the rescaled correlation",
          phi=0.4, r_min=1e-4, r_max=5.0, n_r=40)
def run_cone(p, rng) -> Output:
    _positive(p, "r_min", "n_r")
    if p["r_max"] <= p["r_min"]:
        raise ParamError("need r_min < r_max")
    out = Output()
    rs = np.geomspace(p["r_min"], p["r_max"], p["n_r"])
    rows = []
    for r in rs:
        F = sg.cone_correlation(r, p["phi"], rescale=True)
        rows.append({"r": r, **{f"F{i}{j}_re": F[i, j].real for i in range(2) for j in range(2)},
                     **{f"F{i}{j}_im": F[i, j].imag for i in range(2) for j in range(2)}})
    out.tables["rescaled_correlation"] = rows
    out.plots["rescaled_correlation"] = (rs.tolist(), [r["F00_re"] for r in rows])
    pts = [(r, ph) for r in np.linspace(0.05, 5, 12) for ph in (0.3, 1.7, 4.0)]
    res = max(sg.eigen_residual(sg.CONE_METRIC, sg.CONE_MODEL, f, 1.0, pts)
              for f in (sg.cone_spinor_plus, sg.cone_spinor_minus))
    out.summary["limit"] = sg.cone_rescaled_limit()
    out.checks.append(acc.Check("explicit-solution residual", res, 1e-8))
    return out


@scenario("cone-s1", "Cone x S1: limit of the correlation matrix at the tip", n_phi=16)
def run_cone_s1(p, rng) -> Output:
    _positive(p, "n_phi")
    out = Output()
    rows = []
    for ph in np.linspace(0, 2 * np.pi, p["n_phi"], endpoint=False):
        L = sg.cone_s1_limit(ph)
        rows.append({"phi": ph, "L00": L[0, 0].real, "L11": L[1, 1].real, "L01_re": L[0, 1].real,
                     "L01_im": L[0, 1].imag, "rank": int(np.linalg.matrix_rank(L, tol=1e-6))})
    out.tables["limit"] = rows
    mods = [math.hypot(r["L01_re"], r["L01_im"]) for r in rows]
    out.checks += [acc.Check("rank 2", all(r["rank"] == 2 for r in rows), 0, "true"),
                   acc.Check("off-diagonal modulus spread", max(mods) - min(mods), 1e-6)]
    return out


@scenario("schwarzschild", "Schwarzschild interior: radial modes and a wave packet",
          M=1.0, omega=1.0, lam=1, k=0.5, m_mass=0.1, r_min=0.01, r_max=1.9, packet=False, omega0=40.0)
def run_schwarzschild(p, rng) -> Output:
    try:
        mode = sg.ModeSpec(p["omega"], p["lam"], p["k"], p["m_mass"])
        sol = sg.schwarzschild_radial(p["M"], mode, (p["r_min"], p["r_max"]), init=(0.6, 0.8j))
    except ValueError as e:
        raise ParamError(str(e)) from e
    out = _mode_output(sol, "mode", 1e-6)
    lad = sg.continuity_ladder(p["M"], mode)
    out.summary["continuity_diffs"] = list(map(float, lad["diffs"]))
    if p["packet"]:
        wp = sg.wave_packet(p["M"], p["lam"], p["m_mass"], omega0=p["omega0"])
        out.summary["packet_slope"] = float(wp["slope"])
        out.plots["packet"] = (np.asarray(wp["u"]).tolist(), np.asarray(wp["centroid"]).tolist())
        out.checks.append(acc.Check("packet slope", abs(wp["slope"] - 1), 0.05))
    return out


@scenario("lattice", "Torus lattice: distance checks, nerve scans in r and delta",
          kappa=math.pi / 8, r_list=[0.2, 0.45, 0.6, 1.0, 1.5, 2.0, 2.5], deltas=[0.02, 0.05, 0.2],
          complex_r=0.6)
def run_lattice(p, rng) -> Output:
    _positive(p, "kappa")
    if any(r <= 0 for r in p["r_list"]) or any(d <= 0 for d in p["deltas"]):
        raise ParamError("scales must be positive")
    out = Output()
    cloud = acc.lattice_cloud(p["kappa"])
    out.tables["r_scan"] = topo.scale_scan(cloud, p["r_list"])
    out.tables["delta_scan"] = topo.delta_scan(cloud, p["deltas"])
    if p["complex_r"] > 0:
        # nerve complex at one scale; complex_r = 0 skips it
        cx = topo.m_r_complex(cloud, p["complex_r"])
        out.documents["complex"] = json.loads(cx.to_json())
    out.plots["r_scan_beta1"] = (list(p["r_list"]), [r["beta1"] for r in out.tables["r_scan"]])
    out.summary.update(n_points=len(cloud), r_window=topo.lattice_window(p["kappa"]),
                       delta_window=topo.lattice_delta_window(p["kappa"]),
                       max_distance=float(cloud.distances.max()))
    return out


# --- output ------------------------------------------------------------------

def _mat(m) -> dict:
    m = np.asarray(m)
    return {"re": m.real.tolist(), "im": m.imag.tolist()}


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        return float(obj) if math.isfinite(obj) else str(obj)
    if isinstance(obj, complex):
        return {"re": obj.real, "im": obj.imag}
    return obj


def write_outputs(out: Output, outdir: Path, name: str, params: dict, seed: int,
                  plot_data: bool, select: list | None = None) -> list:
    outdir.mkdir(parents=True, exist_ok=True)
    written = []
    for tname, rows in out.tables.items():
        if select and tname not in select or not rows:
            continue
        path = outdir / f"{name}_{tname}.csv"
        with open(path, "w", newline="") as fh:
            w = csv.DictWriter(fh, fieldnames=list(rows[0].keys()))
            w.writeheader()
            w.writerows(rows)
        written.append(path)
    for dname, doc in out.documents.items():
        if select and dname not in select:
            continue
        path = outdir / f"{name}_{dname}.json"
        path.write_text(json.dumps(_jsonable(doc), indent=1))
        written.append(path)
    if plot_data:
        for pname, (xs, ys) in out.plots.items():
            path = outdir / f"{name}_{pname}_plot.csv"
            with open(path, "w", newline="") as fh:
                w = csv.writer(fh)
                w.writerow(["x", "y"])
                w.writerows(zip(xs, ys))
            written.append(path)
    report = {"scenario": name, "seed": seed, "params": params, "summary": out.summary,
              "checks": [{"name": c.name, "value": c.value, "tol": c.tol, "passed": c.passed()}
                         for c in out.checks]}
    path = outdir / f"{name}_report.json"
    path.write_text(json.dumps(_jsonable(report), indent=1))
    written.append(path)
    return written


def load_config(path) -> dict:
    try:
        with open(path, "rb") as fh:
            return tomllib.load(fh)
    except (OSError, tomllib.TOMLDecodeError) as e:
        raise ConfigError(f"cannot read config {path}: {e}") from e


def execute(name: str, params: dict, outdir: Path, seed: int = 0, plot_data: bool = False,
            select: list | None = None, stream=None) -> int:
    stream = stream or sys.stdout
    if name not in SCENARIOS:
        print(f"unknown scenario: {name}", file=sys.stderr)
        return EXIT_CONFIG
    sc = SCENARIOS[name]
    try:
        full = validate_params(sc, params)
        known = set(sc.defaults) | {"eigenvalues", "closed_chain", "kernel", "identities", "gamma_map",
                                    "measure", "landscape", "maximizer", "E_pairs", "gamma_augmented",
                                    "mode", "rescaled_correlation", "limit", "r_scan", "delta_scan",
                                    "complex"}
        if select and not set(select) <= known:
            raise ConfigError(f"unknown output(s): {sorted(set(select) - known)}")
        out = sc.run(full, np.random.default_rng(seed))
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except ParamError as e:
        print(f"parameter error: {e}", file=sys.stderr)
        return EXIT_PARAMS
    except (tc.IsolatedPointError, ss.BallEmptyError, np.linalg.LinAlgError, FloatingPointError) as e:
        print(f"numerical failure: {e}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as e:
        print(f"parameter error: {e}", file=sys.stderr)
        return EXIT_PARAMS
    paths = write_outputs(out, outdir, name, full, seed, plot_data, select)
    for c in out.checks:
        print(f"  {c.describe()}", file=stream)
    print(f"{name}: wrote {len(paths)} file(s) to {outdir}", file=stream)
    return EXIT_OK if all(c.passed() for c in out.checks) else EXIT_NUMERIC


def verify_all(only=None, tol_scale: float = 1.0, stream=None) -> int:
    stream = stream or sys.stdout
    print(f"{'criterion':<12} status", file=stream)
    results = acc.run_all(tol_scale, only, report=lambda s: print(s, file=stream, flush=True))
    n_pass = sum(r.passed(tol_scale) for r in results)
    print(f"{n_pass}/{len(results)} criteria passed", file=stream)
    return EXIT_OK if n_pass == len(results) else EXIT_NUMERIC


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="cfl", description="Causal fermion system scenarios")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--config", help="TOML file with parameters (top level or [params])")
        sp.add_argument("--out", default="cfl-out", help="output directory")
        sp.add_argument("--seed", type=int, default=None)
        sp.add_argument("--plot-data", action="store_true", help="also write x/y plot columns")

    for name, sc in SCENARIOS.items():
        common(sub.add_parser(name, help=sc.description))
    runp = sub.add_parser("run", help="run the scenario named in a TOML config")
    runp.add_argument("config_path")
    runp.add_argument("--out", default=None)
    runp.add_argument("--seed", type=int, default=None)
    runp.add_argument("--plot-data", action="store_true")
    sub.add_parser("list", help="list scenarios")
    va = sub.add_parser("verify-all", help="run the acceptance criteria")
    va.add_argument("--only", default="", help="comma separated criterion numbers")
    va.add_argument("--tol-scale", type=float, default=1.0,
                    help="multiply every tolerance; 0 forces controlled failures")
    return ap


def _params_from(cfg: dict) -> dict:
    if "params" in cfg:
        if not isinstance(cfg["params"], dict):
            raise ConfigError("[params] must be a table")
        return dict(cfg["params"])
    return {k: v for k, v in cfg.items() if k not in ("scenario", "seed", "out", "outputs", "plot_data")}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "list":
        for sc in SCENARIOS.values():
            print(f"{sc.name:<16} {sc.description}")
        return EXIT_OK
    if args.command == "verify-all":
        try:
            only = [int(s) for s in args.only.split(",") if s.strip()]
        except ValueError:
            print("--only expects comma separated integers", file=sys.stderr)
            return EXIT_CONFIG
        if any(k not in acc.CRITERIA for k in only):
            print("unknown criterion number", file=sys.stderr)
            return EXIT_CONFIG
        return verify_all(only or None, args.tol_scale)
    cfg: dict = {}
    try:
        if args.command == "run":
            cfg = load_config(args.config_path)
            name = cfg.get("scenario")
            if not isinstance(name, str):
                raise ConfigError("config must name a scenario")
        else:
            name = args.command
            if args.config:
                cfg = load_config(args.config)
                if cfg.get("scenario", name) != name:
                    raise ConfigError(f"config is for scenario {cfg['scenario']!r}, not {name!r}")
        params = _params_from(cfg)
        select = cfg.get("outputs")
        if select is not None and not (isinstance(select, list) and all(isinstance(s, str) for s in select)):
            raise ConfigError("outputs must be a list of names")
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    seed = args.seed if args.seed is not None else int(cfg.get("seed", 0))
    outdir = Path(args.out or cfg.get("out", "cfl-out"))
    plot = bool(args.plot_data or cfg.get("plot_data", False))
    return execute(name, params, outdir, seed, plot, select)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
