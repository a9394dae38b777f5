"""adiaproj: adiabatic ground-state projection on truncated bases.

Prepare an interacting eigenstate by ramping the interaction onto a
known non-interacting eigenstate, read its energy out through an
emulated phase-estimation fit, and extract observables from energy
derivatives.  See the module docstrings for the physics conventions.
"""

from .evolve import (
    DEFAULT_DT,
    EvolutionConfig,
    EvolutionTrace,
    NORM_DRIFT_MAX,
    PropagationError,
    phase_trace,
    propagate,
)
from .hellmann_feynman import (
    DEFAULT_ALPHA_STEP,
    FidelityResult,
    HFRequest,
    HFResult,
    LevelCrossingError,
    NonAdiabaticRunError,
    VarianceResult,
    expectation_hf,
    fidelity_hf,
    variance_x,
)
from .linalg import HermitianOperator, QuantumState, apply, expectation, inner
from .models import (
    ModelKind,
    ModelSpec,
    ObservableKind,
    ObservableSpec,
    assemble,
    build_h0,
    build_h1,
    build_observable,
    build_x,
)
from .oracle import (
    ConvergenceError,
    SpectralDecomposition,
    diagonalize,
    imaginary_time_ground,
)
from .readout import (
    EnergyEstimate,
    ReadoutError,
    measure_energy,
    rayleigh_energy,
)
from .schedule import DEFAULT_RUN_TIME, Schedule, ScheduleShape

__version__ = "0.1.0"

__all__ = [
    "DEFAULT_ALPHA_STEP",
    "DEFAULT_DT",
    "DEFAULT_RUN_TIME",
    "NORM_DRIFT_MAX",
    "ConvergenceError",
    "EnergyEstimate",
    "EvolutionConfig",
    "EvolutionTrace",
    "FidelityResult",
    "HFRequest",
    "HFResult",
    "HermitianOperator",
    "LevelCrossingError",
    "ModelKind",
    "ModelSpec",
    "NonAdiabaticRunError",
    "ObservableKind",
    "ObservableSpec",
    "PropagationError",
    "QuantumState",
    "ReadoutError",
    "Schedule",
    "ScheduleShape",
    "SpectralDecomposition",
    "VarianceResult",
    "apply",
    "assemble",
    "build_h0",
    "build_h1",
    "build_observable",
    "build_x",
    "diagonalize",
    "expectation",
    "expectation_hf",
    "fidelity_hf",
    "imaginary_time_ground",
    "inner",
    "measure_energy",
    "phase_trace",
    "propagate",
    "rayleigh_energy",
    "variance_x",
    "__version__",
]
