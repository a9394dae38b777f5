"""Observables from energy derivatives (Hellmann-Feynman central differences).

For H(alpha) = H0 + f * (H1 + alpha * O) the derivative of the n-th
eigenvalue at full switching is the expectation of O in the n-th
interacting eigenstate.  Running the adiabatic projection twice with
probe strengths +alpha and -alpha and central-differencing the two
final energies therefore measures <O> without ever constructing the
eigenstate explicitly:

    <O>_n = (E_n(+alpha) - E_n(-alpha)) / (2 alpha) + O(alpha^2)

The two runs share every systematic error source (truncation, finite
ramp time, integration bias), so those errors largely cancel in the
difference; the surviving error is the O(alpha^2) curvature term.

``variance_x`` combines the x and x^2 probes into Delta x^2, and
``fidelity_hf`` probes a level projector, whose derivative is the
occupation probability of that bare level in the interacting eigenstate.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .evolve import EvolutionConfig, EvolutionTrace, propagate
from .linalg import QuantumState
from .models import (
    ModelKind,
    ModelSpec,
    ObservableKind,
    ObservableSpec,
    assemble,
)
from .readout import rayleigh_energy
from .schedule import Schedule

DEFAULT_ALPHA_STEP = 0.001
FIDELITY_RANGE_SLACK = 1e-6
CROSSING_SIGMA_FRACTION = 0.25


class NonAdiabaticRunError(RuntimeError):
    """A probe run violated the norm-drift compliance bound."""

    def __init__(self, message: str, traces: tuple | None = None):
        super().__init__(message)
        self.traces = traces


class LevelCrossingError(RuntimeError):
    """The probe runs did not stay on a single level."""


@dataclass(frozen=True)
class HFRequest:
    """One central-difference measurement.

    Attributes:
        base_spec: Model with alpha == 0; the probe is added here.
        observable: Operator whose expectation is requested.
        alpha_step: Half-width of the central difference, > 0.
        level: Index of the H0 eigenstate the runs start from.
    """

    base_spec: ModelSpec
    observable: ObservableSpec
    alpha_step: float = DEFAULT_ALPHA_STEP
    level: int = 0

    def __post_init__(self):
        if self.base_spec.alpha != 0.0:
            raise ValueError("base_spec must have alpha == 0; the probe is added here")
        if not self.alpha_step > 0.0:
            raise ValueError(f"alpha_step must be > 0, got {self.alpha_step}")
        if not 0 <= self.level < self.base_spec.dim:
            raise ValueError(f"level {self.level} outside basis of size {self.base_spec.dim}")


@dataclass
class HFResult:
    """Central-difference value with the two one-sided energies."""

    value: float
    energy_plus: float
    energy_minus: float
    alpha_step: float
    level: int
    traces: tuple[EvolutionTrace, EvolutionTrace] | None = None

    @property
    def level_energy(self) -> float:
        """(E+ + E-)/2, the probe-free level energy to O(alpha^2)."""
        return 0.5 * (self.energy_plus + self.energy_minus)


def _probe_run(
    spec: ModelSpec,
    schedule: Schedule,
    config: EvolutionConfig,
    level: int,
) -> tuple[float, EvolutionTrace]:
    trace = propagate(
        spec, schedule, config, initial_state=QuantumState.basis(spec.dim, level)
    )
    if not trace.compliant:
        raise NonAdiabaticRunError(
            f"probe run at alpha={spec.alpha:+g} drifted in norm by "
            f"{trace.norm_drift:.3e} (> 1e-8); decrease dt",
            traces=(trace,),
        )
    return rayleigh_energy(spec, trace.final_state), trace


def expectation_hf(
    request: HFRequest,
    schedule: Schedule,
    config: EvolutionConfig,
    keep_traces: bool = False,
) -> HFResult:
    """<O> in the adiabatically reached eigenstate, by central difference.

    Runs the projection at probe strengths +/- alpha_step from the same
    H0 eigenstate and differences the two Rayleigh energies of the final
    states.  Truncation error is O(alpha_step^2).

    Raises:
        NonAdiabaticRunError: if either run exceeds the norm-drift bound.
    """
    results = []
    for sign in (+1.0, -1.0):
        spec_s = request.base_spec.with_probe(request.observable, sign * request.alpha_step)
        results.append(_probe_run(spec_s, schedule, config, request.level))
    (e_plus, trace_plus), (e_minus, trace_minus) = results
    value = (e_plus - e_minus) / (2.0 * request.alpha_step)
    return HFResult(
        value=float(value),
        energy_plus=float(e_plus),
        energy_minus=float(e_minus),
        alpha_step=request.alpha_step,
        level=request.level,
        traces=(trace_plus, trace_minus) if keep_traces else None,
    )


@dataclass
class VarianceResult:
    """Delta x^2 together with the two first moments it came from."""

    variance: float
    mean_x: float
    mean_x_squared: float
    alpha_step: float


def variance_x(
    spec: ModelSpec,
    schedule: Schedule,
    config: EvolutionConfig,
    alpha_step: float = DEFAULT_ALPHA_STEP,
) -> VarianceResult:
    """Position variance <x^2> - <x>^2 of the interacting ground state.

    Only meaningful for the oscillator models; four probe runs total.
    """
    if spec.kind is ModelKind.PSM:
        raise ValueError("variance_x applies to the oscillator models only")
    x2 = expectation_hf(
        HFRequest(spec, ObservableSpec(ObservableKind.X_SQUARED), alpha_step),
        schedule,
        config,
    )
    x1 = expectation_hf(
        HFRequest(spec, ObservableSpec(ObservableKind.X), alpha_step),
        schedule,
        config,
    )
    return VarianceResult(
        variance=float(x2.value - x1.value**2),
        mean_x=x1.value,
        mean_x_squared=x2.value,
        alpha_step=alpha_step,
    )


@dataclass
class FidelityResult:
    """Occupation F_n of bare level n in the interacting eigenstate."""

    fidelity: float
    level: int
    level_energy: float
    energy_plus: float
    energy_minus: float
    alpha_step: float


def _energy_sigma(spec: ModelSpec, state: QuantumState) -> float:
    """Energy standard deviation of a state under the switched generator."""
    h = assemble(spec, 1.0).to_dense()
    x = state.normalized().amplitudes
    y = h @ x
    e = float(np.real(np.vdot(x, y)))
    var = float(np.real(np.vdot(y, y))) - e * e
    return float(np.sqrt(max(var, 0.0)))


def fidelity_hf(
    spec: ModelSpec,
    level: int,
    schedule: Schedule,
    config: EvolutionConfig,
    alpha_step: float = DEFAULT_ALPHA_STEP,
) -> FidelityResult:
    """F_n = |<n|psi_n>|^2 via a projector probe on the level model.

    Starts both probe runs from bare level n, so the derivative of
    E_n with respect to the projector strength is the occupation of
    that bare level in the interacting eigenstate psi_n.

    Raises:
        LevelCrossingError: if a final state straddles several levels
            (energy spread above a quarter level spacing) or the
            derivative lands outside [0, 1] beyond numerical slack.
        NonAdiabaticRunError: if a probe run violates norm compliance.
    """
    if spec.kind is not ModelKind.PSM:
        raise ValueError("fidelity_hf applies to the level model only")
    request = HFRequest(
        spec, ObservableSpec(ObservableKind.PROJECTOR, level), alpha_step, level
    )
    result = expectation_hf(request, schedule, config, keep_traces=True)
    for trace, sign in zip(result.traces, ("+", "-")):
        sigma = _energy_sigma(trace.spec, trace.final_state)
        if sigma > CROSSING_SIGMA_FRACTION * spec.delta:
            raise LevelCrossingError(
                f"final state of the {sign}alpha run has energy spread "
                f"{sigma:.3g}, more than {CROSSING_SIGMA_FRACTION} of the level "
                f"spacing {spec.delta}; the run crossed levels"
            )
    raw = result.value
    if raw < -FIDELITY_RANGE_SLACK or raw > 1.0 + FIDELITY_RANGE_SLACK:
        raise LevelCrossingError(
            f"projector derivative {raw:.6g} outside [0, 1]; the two probe "
            "runs did not track the same level"
        )
    return FidelityResult(
        fidelity=float(min(max(raw, 0.0), 1.0)),
        level=level,
        level_energy=result.level_energy,
        energy_plus=result.energy_plus,
        energy_minus=result.energy_minus,
        alpha_step=alpha_step,
    )
