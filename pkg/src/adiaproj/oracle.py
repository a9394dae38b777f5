"""Static reference solvers the dynamics can be checked against.

Two independent routes to the spectrum: exact dense diagonalization and
imaginary-time projection, which damps every excited component of a
start vector through repeated application of (I - dtau * H).  Neither
touches the real-time propagator, so agreement between all three is a
meaningful cross-check rather than a tautology.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg import HermitianOperator, QuantumState, _apply_bands_real

RESIDUAL_RTOL = 1e-10
ORTHOGONALITY_ATOL = 1e-10
MAX_DIM = 4096
MAX_ITERATIONS = 1_000_000


class ConvergenceError(RuntimeError):
    """An iterative solver ran out of iterations or lost accuracy."""


@dataclass(frozen=True)
class SpectralDecomposition:
    """Eigenvalues in ascending order with matching eigenvector columns.

    ``residual`` is max_n ||H v_n - E_n v_n||_2; construction rejects
    decompositions whose residual exceeds RESIDUAL_RTOL times the
    spectral scale or whose vectors are not orthonormal to 1e-10.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    residual: float

    @property
    def dim(self) -> int:
        return self.eigenvalues.shape[0]

    def state(self, n: int) -> QuantumState:
        """Eigenvector n as a normalized QuantumState."""
        if not 0 <= n < self.dim:
            raise ValueError(f"level {n} outside [0, {self.dim})")
        return QuantumState(self.dim, self.eigenvectors[:, n].astype(np.complex128))

    def ground_energy(self) -> float:
        return float(self.eigenvalues[0])


def diagonalize(op: HermitianOperator) -> SpectralDecomposition:
    """Full spectrum of a Hermitian operator via dense diagonalization.

    Raises:
        ValueError: for dimensions above MAX_DIM.
        ConvergenceError: if the eigen-residual exceeds RESIDUAL_RTOL
            relative to the largest |eigenvalue| (scale floor 1), or the
            eigenvectors fail the orthonormality check.
    """
    if op.dim > MAX_DIM:
        raise ValueError(f"dim {op.dim} exceeds diagonalization limit {MAX_DIM}")
    m = op.to_dense()
    vals, vecs = np.linalg.eigh(m)
    resid = float(np.max(np.linalg.norm(m @ vecs - vecs * vals, axis=0)))
    scale = max(1.0, float(np.max(np.abs(vals))))
    if resid > RESIDUAL_RTOL * scale:
        raise ConvergenceError(
            f"eigen-residual {resid:.3e} exceeds {RESIDUAL_RTOL:.0e} * {scale:.3g}"
        )
    gram = vecs.conj().T @ vecs
    ortho = float(np.max(np.abs(gram - np.eye(op.dim))))
    if ortho > ORTHOGONALITY_ATOL:
        raise ConvergenceError(f"eigenvectors not orthonormal: deviation {ortho:.3e}")
    return SpectralDecomposition(
        eigenvalues=np.asarray(vals, dtype=np.float64),
        eigenvectors=np.asarray(vecs),
        residual=resid,
    )


def _gershgorin_range(op: HermitianOperator) -> float:
    """Width of the union of Gershgorin intervals (spectral-range bound)."""
    if op.is_banded:
        b = op.bands
        radii = np.zeros(op.dim)
        for k in range(1, b.shape[0]):
            v = np.abs(b[k, : op.dim - k])
            radii[: op.dim - k] += v
            radii[k:] += v
        centers = b[0]
    else:
        m = op.dense
        centers = np.real(np.diagonal(m))
        radii = np.sum(np.abs(m), axis=1) - np.abs(np.diagonal(m))
    return float(np.max(centers + radii) - np.min(centers - radii))


def imaginary_time_ground(
    op: HermitianOperator,
    initial_state: QuantumState | None = None,
    dtau: float | None = None,
    tol: float = 1e-12,
    max_iterations: int = MAX_ITERATIONS,
) -> tuple[float, QuantumState]:
    """Ground state by normalized first-order imaginary-time stepping.

    Iterates psi <- normalize((I - dtau * H) psi) until the Rayleigh
    quotient moves less than ``tol`` per step.  Converges to the lowest
    eigenvector provided the start overlaps it (not detectable here;
    cross-check against ``diagonalize`` when in doubt).

    Args:
        op: Hermitian operator to minimize over.
        initial_state: Start vector; default is a uniform superposition,
            which overlaps every sign-definite ground state.
        dtau: Imaginary-time step.  Must satisfy dtau * spectral_range
            < 0.5 (range bounded by the Gershgorin interval width); the
            default sits at 0.45 of that window, which contracts fastest
            without risking sign flips at the top of the spectrum.
        tol: Per-step Rayleigh-quotient change that counts as settled.
            The converged energy sits above the true minimum by roughly
            tol / (2 * dtau * gap), so tighten tol when the gap is small
            relative to the spectral range.
        max_iterations: Iteration cap.

    Raises:
        ValueError: for a dtau outside the contraction window.
        ConvergenceError: if the cap is reached first.
    """
    spread = _gershgorin_range(op)
    if dtau is None:
        dtau = 0.45 / spread if spread > 0.0 else 0.1
    elif dtau <= 0.0 or dtau * spread >= 0.5:
        raise ValueError(
            f"dtau={dtau} outside the contraction window "
            f"(need dtau * {spread:.3g} < 0.5)"
        )
    if initial_state is None:
        x = np.full(op.dim, 1.0 / np.sqrt(op.dim), dtype=np.complex128)
    else:
        if initial_state.dim != op.dim:
            raise ValueError("state/operator dimension mismatch")
        x = initial_state.normalized().amplitudes.copy()

    if op.is_banded:
        bands = op.bands

        def matvec(v):
            return _apply_bands_real(bands, v)
    else:
        dense = op.dense

        def matvec(v):
            return dense @ v

    energy_prev = np.inf
    for _ in range(max_iterations):
        y = matvec(x)
        energy = float(np.real(np.vdot(x, y)))
        if abs(energy - energy_prev) < tol:
            return energy, QuantumState(op.dim, x)
        energy_prev = energy
        x = x - dtau * y
        x /= np.linalg.norm(x)
    raise ConvergenceError(
        f"imaginary-time iteration did not settle within {max_iterations} steps "
        f"(last energy {energy:.12g}); the gap may be small relative to the "
        "spectral range — pass a larger dtau within the window or a tighter tol"
    )
