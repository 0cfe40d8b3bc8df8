import json
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from cfl import builders as bd
from cfl import topo
from cfl.acceptance import lattice_cloud, random_complex, random_unitary
from strategies import seeds


def cycle_adj(n, offset=0, size=None):
    size = size or n
    adj = np.zeros((size, size), bool)
    for i in range(n):
        a, b = offset + i, offset + (i + 1) % n
        adj[a, b] = adj[b, a] = True
    return adj


@pytest.fixture(scope="module")
def lattice():
    return lattice_cloud(math.pi / 8)


def test_strata_lattice(lattice):
    assert set(topo.strata(lattice)) == {(0, 2)}


def test_strata_mixed():
    mats = [bd.sphere_operator((0, 0, 1)), np.zeros((2, 2)), np.diag([-1.0, -2.0])]
    s = topo.strata(topo.OperatorCloud(mats))
    assert s == {(1, 1): [0], (0, 0): [1], (0, 2): [2]}


def test_cloud_rejects_unknown_norm():
    with pytest.raises(ValueError):
        topo.OperatorCloud(np.zeros((2, 2, 2)), norm="fro")


def test_distance_norms():
    mats = np.array([np.diag([3.0, 0.0]), np.diag([0.0, 4.0])])
    assert topo.distance_matrix(mats, "hs")[0, 1] == pytest.approx(5.0)
    assert topo.distance_matrix(mats, "sup")[0, 1] == pytest.approx(4.0)


def test_m_r_extremes(lattice):
    small = topo.m_r_complex(lattice, 1e-3)
    assert small.edges == [] and small.triangles == []
    big = topo.m_r_complex(lattice, 10.0, triangles=False)
    n = len(lattice)
    assert len(big.edges) == n * (n - 1) // 2


def test_betti_cycle():
    rep = topo.betti(topo.flag_complex(cycle_adj(8)))
    assert (rep.beta0, rep.beta1) == (1, 1)
    assert rep.euler_consistent()


def test_betti_two_cycles():
    adj = cycle_adj(5, 0, 11) | cycle_adj(6, 5, 11)
    rep = topo.betti(topo.flag_complex(adj))
    assert (rep.beta0, rep.beta1) == (2, 2)


def test_betti_filled_triangle():
    adj = ~np.eye(3, dtype=bool)
    rep = topo.betti(topo.flag_complex(adj))
    assert (rep.beta0, rep.beta1, rep.n_triangles) == (1, 0, 1)


def test_flag_betti_matches_betti_on_cycle():
    assert topo.flag_betti(cycle_adj(8)) == (1, 1)


def test_gf2_rank():
    assert topo.gf2_rank([0b011, 0b110, 0b101]) == 2
    assert topo.gf2_rank([0b1, 0b10, 0b100], stop_at=2) == 2


def test_lattice_torus_at_intermediate_scale(lattice):
    row = topo.scale_scan(lattice, [1.2])[0]
    assert (row["beta0"], row["beta1"]) == (1, 2)
    assert row["regime"] == "torus"


def test_lattice_scan_regimes(lattice):
    rows = topo.scale_scan(lattice, [0.2, 1.2, 3.0])
    assert [r["regime"] for r in rows] == ["discrete", "torus", "blob"]


def test_lattice_delta_window(lattice):
    lo, _ = topo.lattice_delta_window(math.pi / 8)
    rows = topo.delta_scan(lattice, [1.5 * lo])
    assert rows[0]["regime"] == "torus"


def test_r_delta_edge_cases(lattice):
    with pytest.warns(UserWarning):
        assert topo.r_delta(lattice, 0, 1.0) == math.inf
    # a ball containing only the centre already weighs 1/256
    assert topo.r_delta(lattice, 0, 1e-6) == 0.0
    r = topo.r_delta(lattice, 0, 0.05)
    assert 0 < r < math.inf


def test_r_delta_monotone(lattice):
    rs = [topo.r_delta(lattice, 3, d) for d in (0.02, 0.1, 0.3, 0.6)]
    assert rs == sorted(rs)


def test_strong_collapse_keeps_cycle():
    assert len(topo.strong_collapse(cycle_adj(6))) == 6
    # a cone collapses to a point
    adj = cycle_adj(5, 0, 6)
    adj[5, :5] = adj[:5, 5] = True
    assert len(topo.strong_collapse(adj)) == 1


def test_regime_label():
    assert topo.regime_label(5, 0, 5, 0) == "discrete"
    assert topo.regime_label(1, 2, 5, 4) == "torus"
    assert topo.regime_label(1, 0, 5, 4) == "blob"
    assert topo.regime_label(2, 1, 5, 4) == "other"


def test_nerve_serialization(tmp_path):
    cx = topo.flag_complex(~np.eye(3, dtype=bool))
    d = json.loads(cx.to_json())
    assert d["edges"] == [[0, 1], [0, 2], [1, 2]]
    assert d["triangles"] == [[0, 1, 2]]
    p = tmp_path / "cx.csv"
    cx.to_csv(p)
    assert p.read_text().splitlines()[-1] == "triangle,0,1,2"


def test_scan_csv(tmp_path, lattice):
    p = tmp_path / "scan.csv"
    topo.write_scan_csv(topo.scale_scan(lattice, [0.2]), p)
    assert p.read_text().splitlines()[0] == "r,beta0,beta1,edges,regime"


# --- properties ----------------------------------------------------------------

@given(seeds)
def test_random_complex_downward_closed_and_euler(seed):
    cx = random_complex(np.random.default_rng(seed))
    assert cx.is_downward_closed()
    assert topo.betti(cx).euler_consistent()


@given(seeds)
def test_collapse_preserves_betti(seed):
    rng = np.random.default_rng(seed)
    adj = np.triu(rng.random((10, 10)) < 0.35, 1)
    adj = adj | adj.T
    rep = topo.betti(topo.flag_complex(adj))
    assert topo.flag_betti(adj) == (rep.beta0, rep.beta1)


@given(st.floats(0.05, 1.0), st.floats(0.05, 1.0))
def test_edges_monotone_in_r(r1, r2):
    cloud = lattice_cloud(math.pi / 4)
    a, b = sorted((r1, r2))
    ea = set(topo.m_r_complex(cloud, a, triangles=False).edges)
    eb = set(topo.m_r_complex(cloud, b, triangles=False).edges)
    assert ea <= eb


def test_beta0_non_increasing(lattice):
    rows = topo.scale_scan(lattice, np.linspace(0.1, 3.0, 12))
    b0 = [r["beta0"] for r in rows]
    assert all(x >= y for x, y in zip(b0, b0[1:]))


@given(seeds)
def test_unitary_invariance(seed):
    rng = np.random.default_rng(seed)
    pts = rng.normal(size=(12, 3))
    pts /= np.linalg.norm(pts, axis=1)[:, None]
    mats = np.array([bd.sphere_operator(p) for p in pts])
    U = random_unitary(rng)
    rot = np.array([U @ m @ U.conj().T for m in mats])
    for norm in ("sup", "hs"):
        assert np.allclose(topo.distance_matrix(mats, norm), topo.distance_matrix(rot, norm), atol=1e-10)


def test_scan_dense_uncollapsible_graph(lattice):
    # near half the diameter every vertex misses only a few far points, so
    # strong collapse removes nothing; triangles are streamed instead
    row = topo.scale_scan(lattice, [2.47])[0]
    assert row["edges"] > 30000
    assert (row["beta0"], row["beta1"]) == (1, 0)
