"""Modified Bessel functions K0, K1 of complex argument.

Ascending series for |z| < 8, Hankel asymptotic expansion beyond. Principal
branches; intended for Re z >= 0, which is where the mass-shell kernels live.
J0 and J1 of real argument come from scipy.special.
"""
from __future__ import annotations

import numpy as np
from scipy import special

EULER_GAMMA = 0.57721566490153286061
SERIES_RADIUS = 8.0


def _series_k0_k1(z: complex) -> tuple[complex, complex]:
    q = z * z / 4.0
    log_half = np.log(z / 2.0)
    term = 1.0 + 0j        # (z^2/4)^k / (k!)^2
    harmonic = 0.0         # H_k
    i0 = 0j
    k0_sum = 0j
    i1 = 0j
    k1_sum = 0j
    psi_k1 = -EULER_GAMMA          # psi(k+1)
    psi_k2 = 1.0 - EULER_GAMMA     # psi(k+2)
    for k in range(200):
        i0 += term
        k0_sum += term * harmonic
        t1 = term / (k + 1)        # (z^2/4)^k / (k!(k+1)!)
        i1 += t1
        k1_sum += t1 * (psi_k1 + psi_k2)
        if abs(term) < 1e-18 * abs(i0) and k > 2:
            break
        term = term * q / ((k + 1) ** 2)
        harmonic += 1.0 / (k + 1)
        psi_k1 += 1.0 / (k + 1)
        psi_k2 += 1.0 / (k + 2)
    k0 = -(log_half + EULER_GAMMA) * i0 + k0_sum
    i1 = i1 * z / 2.0
    k1 = 1.0 / z + log_half * i1 - (z / 4.0) * k1_sum
    return k0, k1


def _asymptotic_k(nu: float, z: complex) -> complex:
    mu = 4.0 * nu * nu
    total = 1.0 + 0j
    term = 1.0 + 0j
    best = np.inf
    for k in range(1, 60):
        term = term * (mu - (2 * k - 1) ** 2) / (k * 8.0 * z)
        if abs(term) > best:
            break
        best = abs(term)
        total += term
        if best < 1e-17:
            break
    return np.sqrt(np.pi / (2.0 * z)) * np.exp(-z) * total


def kv01(z) -> tuple[complex, complex]:
    """Return (K0(z), K1(z)) for a single complex z."""
    z = complex(z)
    if z == 0:
        raise ZeroDivisionError("K0, K1 are singular at z = 0")
    if abs(z) < SERIES_RADIUS:
        return _series_k0_k1(z)
    return _asymptotic_k(0.0, z), _asymptotic_k(1.0, z)


def k0(z) -> complex:
    return kv01(z)[0]


def k1(z) -> complex:
    return kv01(z)[1]


def j0(x):
    return special.j0(x)


def j1(x):
    return special.j1(x)


def j1_over_x(x):
    """J1(x)/x, continuous at 0 with value 1/2."""
    x = np.asarray(x, dtype=float)
    small = np.abs(x) < 1e-6
    safe = np.where(small, 1.0, x)
    return np.where(small, 0.5 - x * x / 16.0, special.j1(safe) / safe)
