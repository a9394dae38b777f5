"""Shared reference implementations, deliberately slow and transparent.

Everything here recomputes what the package computes, by a different
route: dense complex matrices instead of split real storage, python
loops instead of compiled kernels.  Tests compare the two.
"""

import numpy as np
import pytest

from adiaproj import ModelSpec, Schedule, assemble


def dense_hamiltonian(spec: ModelSpec, f_value: float) -> np.ndarray:
    return assemble(spec, f_value).to_dense().astype(np.complex128)


def reference_rk4(
    spec: ModelSpec,
    schedule: Schedule,
    dt: float,
    n_steps: int,
    initial: np.ndarray,
) -> np.ndarray:
    """Classic RK4 on i dpsi/dt = H(t) psi with dense complex matrices.

    Samples f(t) at the same three points per step as the production
    integrator, so the two should agree to accumulated rounding.
    """
    h0 = dense_hamiltonian(spec, 0.0)
    h1 = dense_hamiltonian(spec, 1.0) - h0  # the switched part, f = 1

    def h_at(t):
        return h0 + schedule.evaluate(min(t, schedule.t_run)) * h1

    psi = initial.astype(np.complex128).copy()
    for s in range(n_steps):
        t = s * dt
        k1 = -1j * (h_at(t) @ psi)
        k2 = -1j * (h_at(t + dt / 2) @ (psi + dt / 2 * k1))
        k3 = -1j * (h_at(t + dt / 2) @ (psi + dt / 2 * k2))
        k4 = -1j * (h_at(t + dt) @ (psi + dt * k3))
        psi = psi + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
    return psi


def naive_matvec(matrix: np.ndarray, vec: np.ndarray) -> np.ndarray:
    """Row-by-row product without BLAS, as an independent check."""
    n = len(vec)
    out = np.zeros(n, dtype=np.complex128)
    for i in range(n):
        acc = 0.0 + 0.0j
        for j in range(n):
            acc += matrix[i, j] * vec[j]
        out[i] = acc
    return out


def random_state(dim: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    v = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return v / np.linalg.norm(v)


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20250825)
