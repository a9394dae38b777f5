"""Real-time propagation of the switched generator H(t) = A + f(t) B.

``propagate`` integrates d psi/dt = -i H(t) psi with classic fixed-step
RK4, starting from an eigenstate of the static part and ramping the
switched part in along a :class:`~adiaproj.schedule.Schedule`.  The
state is never renormalized; the recorded norm drift is the built-in
accuracy diagnostic, with runs flagged compliant when the drift over
all samples stays at or below ``NORM_DRIFT_MAX``.

Recorded energies are Rayleigh quotients of H0 + f(t) B, i.e. without
the constant offset e_c, so shifting e_c changes recorded energies by
exactly zero and only rescales the phase clock that the readout module
measures.

A step size is accepted only if dt * G < ``RK4_STABILITY_LIMIT`` where
G is the Gershgorin bound of the fully switched generator; the RK4
stability interval on the imaginary axis ends at 2*sqrt(2) ~ 2.83, and
the margin keeps every mode safely inside it.  Accuracy usually wants a
much smaller dt than stability does.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .linalg import QuantumState
from .models import (
    ModelKind,
    ModelSpec,
    assemble,
    build_h0,
    build_observable,
    switched_part,
)
from .schedule import Schedule

RK4_STABILITY_LIMIT = 2.5
NORM_DRIFT_MAX = 1e-8
DEFAULT_SAMPLES = 2000
INITIAL_NORM_ATOL = 1e-10

# Conservative per-model step sizes for production runs.
DEFAULT_DT = {
    ModelKind.DHO: 1e-4,
    ModelKind.AHO: 5e-5,
    ModelKind.PSM: 2.5e-4,
}


class PropagationError(RuntimeError):
    """Raised when amplitudes stop being finite during integration."""

    def __init__(self, message: str, step: int | None = None, t: float | None = None):
        super().__init__(message)
        self.step = step
        self.t = t


@dataclass(frozen=True)
class EvolutionConfig:
    """Integration controls.

    Attributes:
        dt: Requested step size; rounded so the run time is an integer
            number of steps (the actual step is reported on the trace).
        sample_stride: Record every this-many steps; 0 picks a stride
            that yields about ``DEFAULT_SAMPLES`` samples.
        record_amplitudes: Keep the full complex state at every sample
            (needed for phase traces and occupation histories).
    """

    dt: float
    sample_stride: int = 0
    record_amplitudes: bool = False

    def __post_init__(self):
        if not self.dt > 0.0:
            raise ValueError(f"dt must be > 0, got {self.dt}")
        if self.sample_stride < 0:
            raise ValueError("sample_stride must be >= 0")


@dataclass
class EvolutionTrace:
    """Sampled history of one propagation.

    ``energies`` hold <H0 + f B> / <psi|psi> at each sample; ``norms``
    are state norms (not squared).  ``amplitudes`` is a (samples, dim)
    complex array when recording was requested, else None.
    """

    times: np.ndarray
    energies: np.ndarray
    f_values: np.ndarray
    norms: np.ndarray
    final_state: QuantumState
    amplitudes: np.ndarray | None
    n_steps: int
    dt: float
    spec: ModelSpec
    schedule: Schedule

    @property
    def norm_drift(self) -> float:
        return float(np.max(np.abs(self.norms - 1.0)))

    @property
    def compliant(self) -> bool:
        """True when norm drift stayed within NORM_DRIFT_MAX on every sample."""
        return self.norm_drift <= NORM_DRIFT_MAX

    @property
    def settled(self) -> bool:
        """True when the last two sampled energies agree to 1e-6 (relative)."""
        if self.energies.shape[0] < 2:
            return False
        de = abs(self.energies[-1] - self.energies[-2])
        return de <= 1e-6 * max(1.0, abs(self.energies[-1]))


class _Generator:
    """Split H(t) = A + f B into kernel-ready arrays.

    Three kernel paths: symmetric-banded B (oscillator models), a
    rank-one-plus-diagonal fast path for the level model (its constant
    interaction matrix acts in O(dim)), and general dense as fallback.
    """

    def __init__(self, spec: ModelSpec):
        h0 = build_h0(spec)
        self.h0_diag = h0.bands[0].copy()
        self.a_diag = self.h0_diag + spec.e_c
        rank1_ok = spec.kind is ModelKind.PSM and (
            spec.observable is None
            or build_observable(spec.observable, spec.dim).bandwidth == 0
        )
        if rank1_ok:
            self.mode = "rank1"
            self.c = spec.g / spec.dim
            self.b_diag = np.zeros(spec.dim)
            if spec.alpha != 0.0:
                self.b_diag += spec.alpha * build_observable(spec.observable, spec.dim).bands[0]
            return
        b = switched_part(spec)
        if b.is_banded:
            self.mode = "banded"
            self.b_diag = b.bands[0].copy()
            offs = [k for k in range(1, b.bands.shape[0]) if np.any(b.bands[k] != 0.0)]
            self.offs = np.asarray(offs, dtype=np.int64)
            self.bvals = (
                np.ascontiguousarray(b.bands[offs])
                if offs
                else np.zeros((0, spec.dim))
            )
        else:
            self.mode = "dense"
            self.bmat = np.ascontiguousarray(b.dense, dtype=np.float64)

    def advance(self, fgrid, step0, n_steps, dt, xr, xi):
        if self.mode == "banded":
            _kernels.rk4_banded(
                self.a_diag, self.b_diag, self.offs, self.bvals,
                fgrid, step0, n_steps, dt, xr, xi,
            )
        elif self.mode == "rank1":
            _kernels.rk4_rank1(
                self.a_diag, self.b_diag, self.c, fgrid, step0, n_steps, dt, xr, xi
            )
        else:
            _kernels.rk4_dense(self.a_diag, self.bmat, fgrid, step0, n_steps, dt, xr, xi)

    def quad_form_b(self, xr, xi):
        """<x|B|x> for the switched part (unnormalized)."""
        if self.mode == "banded":
            q = float(np.dot(self.b_diag, xr * xr + xi * xi))
            for j, k in enumerate(self.offs):
                q += 2.0 * float(
                    np.dot(self.bvals[j, : xr.shape[0] - k],
                           xr[: xr.shape[0] - k] * xr[k:] + xi[: xi.shape[0] - k] * xi[k:])
                )
            return q
        if self.mode == "rank1":
            sr = float(np.sum(xr))
            si = float(np.sum(xi))
            q = self.c * (sr * sr + si * si)
            return q + float(np.dot(self.b_diag, xr * xr + xi * xi))
        yr = self.bmat @ xr
        yi = self.bmat @ xi
        return float(np.dot(xr, yr) + np.dot(xi, yi))

    def energy(self, f, xr, xi, norm_sq):
        e0 = float(np.dot(self.h0_diag, xr * xr + xi * xi))
        return (e0 + f * self.quad_form_b(xr, xi)) / norm_sq


def _stability_check(spec: ModelSpec, dt: float) -> None:
    bound = assemble(spec, 1.0).gershgorin_bound()
    if dt * bound >= RK4_STABILITY_LIMIT:
        raise ValueError(
            f"dt={dt} too large: dt * Gershgorin({bound:.4g}) = {dt * bound:.3g} "
            f">= {RK4_STABILITY_LIMIT} leaves the RK4 stability region"
        )


def _steps_for(t_total: float, dt: float) -> tuple[int, float]:
    n_steps = max(1, int(round(t_total / dt)))
    return n_steps, t_total / n_steps


def _sample_steps(n_steps: int, stride: int) -> np.ndarray:
    if stride <= 0:
        stride = max(1, n_steps // DEFAULT_SAMPLES)
    steps = np.arange(0, n_steps + 1, stride, dtype=np.int64)
    if steps[-1] != n_steps:
        steps = np.append(steps, n_steps)
    return steps


def propagate(
    spec: ModelSpec,
    schedule: Schedule,
    config: EvolutionConfig,
    initial_state: QuantumState | None = None,
) -> EvolutionTrace:
    """Ramp the interaction in over ``schedule`` and return the trace.

    Args:
        spec: Model whose H0/H1 (plus probe and offset) generate motion.
        schedule: Switching profile; its ``t_run`` fixes the duration.
        config: Step size and sampling controls.
        initial_state: Starting state, by default the lowest basis state
            |0>.  Must be normalized to ``INITIAL_NORM_ATOL``.

    Raises:
        ValueError: on dimension mismatch, unnormalized start, or a step
            size outside the stability bound.
        PropagationError: if amplitudes become non-finite mid-run.
    """
    if initial_state is None:
        initial_state = QuantumState.basis(spec.dim, 0)
    if initial_state.dim != spec.dim:
        raise ValueError(
            f"state dim {initial_state.dim} does not match model dim {spec.dim}"
        )
    if abs(initial_state.norm_sq - 1.0) > INITIAL_NORM_ATOL:
        raise ValueError("initial state must be normalized")
    _stability_check(spec, config.dt)

    n_steps, dt = _steps_for(schedule.t_run, config.dt)
    gen = _Generator(spec)
    fgrid = schedule.values(np.linspace(0.0, schedule.t_run, 2 * n_steps + 1))
    sample_steps = _sample_steps(n_steps, config.sample_stride)

    xr = np.ascontiguousarray(initial_state.amplitudes.real)
    xi = np.ascontiguousarray(initial_state.amplitudes.imag)

    n_samp = sample_steps.shape[0]
    energies = np.empty(n_samp)
    norms = np.empty(n_samp)
    f_values = fgrid[2 * sample_steps]
    amps = np.empty((n_samp, spec.dim), dtype=np.complex128) if config.record_amplitudes else None

    for idx, step in enumerate(sample_steps):
        if idx > 0:
            prev = sample_steps[idx - 1]
            gen.advance(fgrid, int(prev), int(step - prev), dt, xr, xi)
        ns = float(np.dot(xr, xr) + np.dot(xi, xi))
        if not np.isfinite(ns) or ns == 0.0:
            raise PropagationError(
                f"non-finite amplitudes at step {step} (t={step * dt:.6g}); "
                "the integration blew up",
                step=int(step),
                t=float(step * dt),
            )
        norms[idx] = np.sqrt(ns)
        energies[idx] = gen.energy(f_values[idx], xr, xi, ns)
        if amps is not None:
            amps[idx] = xr + 1j * xi

    final = QuantumState(spec.dim, xr + 1j * xi)
    return EvolutionTrace(
        times=sample_steps * dt,
        energies=energies,
        f_values=np.asarray(f_values, dtype=np.float64),
        norms=norms,
        final_state=final,
        amplitudes=amps,
        n_steps=n_steps,
        dt=dt,
        spec=spec,
        schedule=schedule,
    )


def phase_trace(trace: EvolutionTrace, n: int = 0) -> np.ndarray:
    """Two-column array [t, Re a_n(t)] from a recorded trace.

    Raises:
        ValueError: if the trace was run without ``record_amplitudes``.
    """
    if trace.amplitudes is None:
        raise ValueError("trace has no amplitudes; rerun with record_amplitudes=True")
    if not 0 <= n < trace.amplitudes.shape[1]:
        raise ValueError(f"level {n} outside basis of size {trace.amplitudes.shape[1]}")
    return np.column_stack((trace.times, trace.amplitudes[:, n].real))


def constant_generator_overlaps(
    spec: ModelSpec,
    state: QuantumState,
    duration: float,
    dt: float,
    n_samples: int = 2000,
) -> tuple[np.ndarray, np.ndarray]:
    """Evolve under the fully switched H(f=1) and track <psi(0)|psi(t)>.

    The input state is normalized internally; overlaps are raw inner
    products against that normalized copy on an evenly strided sample
    grid that always includes both endpoints.  Used by the readout
    module to emulate a phase-estimation energy measurement.
    """
    if state.dim != spec.dim:
        raise ValueError(f"state dim {state.dim} does not match model dim {spec.dim}")
    if duration <= 0.0:
        raise ValueError(f"duration must be > 0, got {duration}")
    _stability_check(spec, dt)

    n_steps, dt_act = _steps_for(duration, dt)
    gen = _Generator(spec)
    fgrid = np.ones(2 * n_steps + 1)
    stride = max(1, n_steps // max(1, n_samples))
    sample_steps = _sample_steps(n_steps, stride)

    ref = state.normalized().amplitudes
    xr = np.ascontiguousarray(ref.real.copy())
    xi = np.ascontiguousarray(ref.imag.copy())

    overlaps = np.empty(sample_steps.shape[0], dtype=np.complex128)
    for idx, step in enumerate(sample_steps):
        if idx > 0:
            prev = sample_steps[idx - 1]
            gen.advance(fgrid, int(prev), int(step - prev), dt_act, xr, xi)
        re = float(np.dot(ref.real, xr) + np.dot(ref.imag, xi))
        im = float(np.dot(ref.real, xi) - np.dot(ref.imag, xr))
        if not (np.isfinite(re) and np.isfinite(im)):
            raise PropagationError(
                f"non-finite amplitudes at step {step} of the readout window",
                step=int(step),
                t=float(step * dt_act),
            )
        overlaps[idx] = re + 1j * im
    return sample_steps * dt_act, overlaps
