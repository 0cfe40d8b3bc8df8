"""Shared hypothesis strategies."""
import numpy as np
from hypothesis import strategies as st

finite = st.floats(-3.0, 3.0, allow_nan=False, allow_infinity=False)
seeds = st.integers(0, 2 ** 31 - 1)


@st.composite
def unit_vectors(draw):
    v = np.array([draw(st.floats(-1, 1)) for _ in range(3)])
    n = np.linalg.norm(v)
    if n < 1e-3:
        return np.array([0.0, 0.0, 1.0])
    return v / n


@st.composite
def riemannian_matrices(draw, n=4, rank=2):
    rng = np.random.default_rng(draw(seeds))
    a = rng.normal(size=(n, rank)) + 1j * rng.normal(size=(n, rank))
    return -(a @ a.conj().T)


@st.composite
def plane_points(draw, extent=4.0):
    return (draw(st.floats(-extent, extent)), draw(st.floats(-extent, extent)))
