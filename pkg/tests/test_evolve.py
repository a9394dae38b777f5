"""Integrator correctness against a dense complex reference, plus trace
semantics (sampling, drift flags, phase traces, readout overlaps)."""

import numpy as np
import pytest

import adiaproj._kernels as kernels
from adiaproj import (
    EvolutionConfig,
    ModelKind,
    ModelSpec,
    PropagationError,
    QuantumState,
    Schedule,
    ScheduleShape,
    assemble,
    diagonalize,
    phase_trace,
    propagate,
)
from adiaproj.evolve import constant_generator_overlaps
from conftest import reference_rk4, random_state


def dho(n_qubits=2, lam=0.7, **kw):
    return ModelSpec(ModelKind.DHO, n_qubits, lam=lam, **kw)


# ----------------------------------------------------- kernel equivalence


def test_banded_propagation_matches_dense_reference():
    spec = dho(n_qubits=2, lam=0.7)
    sched = Schedule(t_run=2.0)
    trace = propagate(spec, sched, EvolutionConfig(dt=1e-3))
    want = reference_rk4(spec, sched, trace.dt, trace.n_steps,
                         QuantumState.basis(4, 0).amplitudes)
    np.testing.assert_allclose(trace.final_state.amplitudes, want, atol=1e-12)


def test_rank1_propagation_matches_dense_reference():
    spec = ModelSpec(ModelKind.PSM, 3, g=-1.0, delta=10.0 / 64.0)
    sched = Schedule(t_run=3.0)
    trace = propagate(spec, sched, EvolutionConfig(dt=1e-3))
    want = reference_rk4(spec, sched, trace.dt, trace.n_steps,
                         QuantumState.basis(8, 0).amplitudes)
    np.testing.assert_allclose(trace.final_state.amplitudes, want, atol=1e-12)


def test_quartic_propagation_matches_dense_reference():
    spec = ModelSpec(ModelKind.AHO, 3, lam=0.4)
    sched = Schedule(t_run=2.0)
    trace = propagate(spec, sched, EvolutionConfig(dt=5e-4))
    want = reference_rk4(spec, sched, trace.dt, trace.n_steps,
                         QuantumState.basis(8, 0).amplitudes)
    np.testing.assert_allclose(trace.final_state.amplitudes, want, atol=1e-12)


def _run_kernel(fn, args, dim, seed, n_steps=200, dt=1e-3):
    v = random_state(dim, seed)
    xr = np.ascontiguousarray(v.real.copy())
    xi = np.ascontiguousarray(v.imag.copy())
    rng = np.random.default_rng(seed + 1)
    fgrid = rng.uniform(0.0, 1.0, 2 * n_steps + 1)
    fn(*args, fgrid, 0, n_steps, dt, xr, xi)
    return xr + 1j * xi


def test_banded_kernel_equals_dense_kernel():
    dim = 16
    rng = np.random.default_rng(3)
    a_diag = rng.normal(size=dim)
    b_diag = rng.normal(size=dim)
    offs = np.array([1, 3], dtype=np.int64)
    bvals = rng.normal(size=(2, dim))
    for j, k in enumerate(offs):
        bvals[j, dim - k:] = 0.0
    bmat = np.diag(b_diag)
    for j, k in enumerate(offs):
        idx = np.arange(dim - k)
        bmat[idx, idx + k] = bvals[j, : dim - k]
        bmat[idx + k, idx] = bvals[j, : dim - k]
    got = _run_kernel(kernels.rk4_banded, (a_diag, b_diag, offs, bvals), dim, 11)
    want = _run_kernel(kernels.rk4_dense, (a_diag, np.ascontiguousarray(bmat)), dim, 11)
    np.testing.assert_allclose(got, want, atol=1e-13)


def test_rank1_kernel_equals_dense_kernel():
    dim = 16
    rng = np.random.default_rng(5)
    a_diag = rng.normal(size=dim)
    b_diag = 0.1 * rng.normal(size=dim)
    c = -0.0625
    bmat = np.full((dim, dim), c) + np.diag(b_diag)
    got = _run_kernel(kernels.rk4_rank1, (a_diag, b_diag, c), dim, 13)
    want = _run_kernel(kernels.rk4_dense, (a_diag, np.ascontiguousarray(bmat)), dim, 13)
    np.testing.assert_allclose(got, want, atol=1e-13)


# ------------------------------------------------------------ trace shape


def test_static_model_stays_put():
    # lam = 0 switches on nothing; |0> only picks up the phase e^{-it/2}
    spec = dho(lam=0.0)
    trace = propagate(spec, Schedule(t_run=10.0), EvolutionConfig(dt=1e-3))
    np.testing.assert_allclose(trace.energies, 0.5, atol=1e-12)
    assert trace.norm_drift < 1e-12
    assert abs(abs(trace.final_state.amplitudes[0]) - 1.0) < 1e-12
    assert trace.compliant
    assert trace.settled


def test_phase_trace_period():
    # energy 1/2 gives Re a_0 = cos(t/2), period 4*pi
    t_run = 4.0 * np.pi
    trace = propagate(
        dho(lam=0.0), Schedule(t_run=t_run),
        EvolutionConfig(dt=t_run / 12000, record_amplitudes=True),
    )
    pt = phase_trace(trace)
    assert pt.shape[1] == 2
    assert pt[-1, 0] == pytest.approx(t_run, rel=1e-12)
    assert pt[-1, 1] == pytest.approx(1.0, abs=1e-9)
    quarter = np.argmin(np.abs(pt[:, 0] - np.pi))  # cos(pi/2) = 0
    # nearest sample sits within half a stride of pi, so allow the slope
    assert pt[quarter, 1] == pytest.approx(0.0, abs=5e-3)


def test_constant_offset_shortens_phase_period():
    # e_c = 1/2 doubles the clock rate: Re a_0 = cos(t), period 2*pi
    t_run = 2.0 * np.pi
    trace = propagate(
        dho(lam=0.0, e_c=0.5), Schedule(t_run=t_run),
        EvolutionConfig(dt=t_run / 12000, record_amplitudes=True),
    )
    pt = phase_trace(trace)
    assert pt[-1, 1] == pytest.approx(1.0, abs=1e-9)
    # recorded energies exclude the offset
    np.testing.assert_allclose(trace.energies, 0.5, atol=1e-12)


def test_phase_trace_requires_amplitudes():
    trace = propagate(dho(), Schedule(t_run=1.0), EvolutionConfig(dt=1e-3))
    with pytest.raises(ValueError, match="record_amplitudes"):
        phase_trace(trace)


def test_phase_trace_level_bounds():
    trace = propagate(
        dho(), Schedule(t_run=1.0), EvolutionConfig(dt=1e-3, record_amplitudes=True)
    )
    with pytest.raises(ValueError, match="outside basis"):
        phase_trace(trace, n=4)


def test_sampling_grid_and_stride():
    trace = propagate(
        dho(), Schedule(t_run=1.0), EvolutionConfig(dt=1e-3, sample_stride=7)
    )
    assert trace.n_steps == 1000
    steps = np.round(trace.times / trace.dt).astype(int)
    assert steps[0] == 0 and steps[-1] == 1000
    assert np.all(np.diff(steps)[:-1] == 7)
    assert trace.times.shape == trace.energies.shape == trace.norms.shape
    assert trace.f_values[0] < 1e-8
    assert trace.f_values[-1] > 1.0 - 1e-8


def test_step_count_rounding():
    trace = propagate(dho(), Schedule(t_run=1.0), EvolutionConfig(dt=0.3))
    assert trace.n_steps == 3
    assert trace.dt == pytest.approx(1.0 / 3.0, rel=1e-15)


def test_linear_ramp_is_not_settled():
    # f keeps changing right up to t_run, so the energy has no plateau
    trace = propagate(
        dho(n_qubits=4, lam=1.0),
        Schedule(t_run=5.0, shape=ScheduleShape.LINEAR),
        EvolutionConfig(dt=1e-3),
    )
    assert not trace.settled


def test_norm_drift_flags_coarse_steps():
    spec = ModelSpec(ModelKind.DHO, 4, lam=3.0)
    sched = Schedule(t_run=2.0, steepness=60.0)
    fine = propagate(spec, sched, EvolutionConfig(dt=1e-2))
    coarse = propagate(spec, sched, EvolutionConfig(dt=2e-2))
    assert fine.norm_drift <= 1e-8
    assert fine.compliant
    assert coarse.norm_drift > 1e-8
    assert not coarse.compliant


# ------------------------------------------------------------- validation


def test_stability_gate_rejects_large_dt():
    spec = ModelSpec(ModelKind.AHO, 6, lam=2.0)
    with pytest.raises(ValueError, match="stability"):
        propagate(spec, Schedule(t_run=1.0), EvolutionConfig(dt=1e-4))


def test_initial_state_validation():
    with pytest.raises(ValueError, match="normalized"):
        propagate(
            dho(), Schedule(t_run=1.0), EvolutionConfig(dt=1e-3),
            initial_state=QuantumState.from_amplitudes([0.5, 0.0, 0.0, 0.0]),
        )
    with pytest.raises(ValueError, match="does not match"):
        propagate(
            dho(n_qubits=3), Schedule(t_run=1.0), EvolutionConfig(dt=1e-3),
            initial_state=QuantumState.basis(4, 0),
        )


def test_evolution_config_validation():
    with pytest.raises(ValueError):
        EvolutionConfig(dt=0.0)
    with pytest.raises(ValueError):
        EvolutionConfig(dt=1e-3, sample_stride=-1)


def test_propagation_error_on_nonfinite_amplitudes(monkeypatch):
    # the stability gate makes a genuine blow-up unreachable, so inject one
    from adiaproj import evolve as ev

    def poison(self, fgrid, step0, n_steps, dt, xr, xi):
        xr[:] = np.nan

    monkeypatch.setattr(ev._Generator, "advance", poison)
    with pytest.raises(PropagationError) as err:
        propagate(dho(), Schedule(t_run=1.0), EvolutionConfig(dt=1e-3))
    assert err.value.step is not None
    assert err.value.t is not None


# --------------------------------------------------------- readout window


def test_eigenstate_overlap_phase_slope():
    spec = dho(n_qubits=4, lam=1.0, e_c=0.3)
    sd = diagonalize(assemble(spec, 1.0))
    state = QuantumState.from_amplitudes(sd.eigenvectors[:, 0])
    times, overlaps = constant_generator_overlaps(spec, state, 20.0, 1e-3)
    np.testing.assert_allclose(np.abs(overlaps), 1.0, atol=1e-10)
    slope = np.polyfit(times, np.unwrap(np.angle(overlaps)), 1)[0]
    assert slope == pytest.approx(-sd.eigenvalues[0], abs=1e-8)


def test_overlap_window_validation():
    spec = dho(n_qubits=2, lam=0.5)
    with pytest.raises(ValueError, match="duration"):
        constant_generator_overlaps(spec, QuantumState.basis(4, 0), -1.0, 1e-3)
    with pytest.raises(ValueError, match="does not match"):
        constant_generator_overlaps(spec, QuantumState.basis(8, 0), 1.0, 1e-3)
