"""Model Hamiltonians on a truncated basis of ``2**n_qubits`` levels.

Three families are supported, all written as H(f) = H0 + f * H1 with a
dimensionless switching factor f in [0, 1]:

    dho   displaced harmonic oscillator
          H0 = diag(n + 1/2),  H1 = lam * x
    aho   quartic anharmonic oscillator
          H0 = diag(n + 1/2),  H1 = lam * x^4 written in closed form
    psm   pairing-style level model
          H0 = diag(k * delta),  H1 = g / 2**n_qubits in every entry

The position operator x uses the convention <n|x|n+1> = sqrt(n+1) / sqrt(2),
so x^2 has 0.5 on the top-left diagonal entry.  The quartic term is
expanded analytically into its diagonal and its second and fourth
superdiagonals; see ``build_h1``.  All operators act in the truncated
space, so products such as x^4 mean the truncated matrix power, which
differs from the analytic expansion only in the last four rows/columns.

A constant offset ``e_c`` times the identity and a probe term
``alpha * O`` (used for Hellmann-Feynman differentiation) complete the
assembled generator:

    H(f) = H0 + f * (H1 + alpha * O) + e_c * I
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from enum import Enum

import numpy as np

from .linalg import HermitianOperator

MAX_QUBITS = 12


class ModelKind(str, Enum):
    DHO = "dho"
    AHO = "aho"
    PSM = "psm"


class ObservableKind(str, Enum):
    X = "x"
    X_SQUARED = "x_squared"
    PROJECTOR = "projector"


@dataclass(frozen=True)
class ObservableSpec:
    """Observable to attach to the switched-on part of the generator.

    ``index`` selects the level for PROJECTOR and must be None otherwise.
    """

    kind: ObservableKind
    index: int | None = None

    def __post_init__(self):
        kind = ObservableKind(self.kind)
        object.__setattr__(self, "kind", kind)
        if kind is ObservableKind.PROJECTOR:
            if self.index is None or self.index < 0:
                raise ValueError("projector observable needs a level index >= 0")
        elif self.index is not None:
            raise ValueError(f"observable {kind.value} takes no index")


@dataclass(frozen=True)
class ModelSpec:
    """Full static description of one model instance.

    Exactly the couplings relevant to ``kind`` may be set: ``lam`` for
    dho/aho, ``g`` and ``delta`` for psm.  ``alpha`` != 0 requires an
    ``observable``.

    Attributes:
        kind: Model family.
        n_qubits: Register size; the basis has 2**n_qubits levels.
        lam: Oscillator coupling (dho: linear tilt, aho: quartic strength).
        g: psm interaction strength (negative values bind).
        delta: psm level spacing, > 0.
        e_c: Constant energy offset added as e_c * identity.
        alpha: Probe strength multiplying the observable inside f(t).
        observable: Probe observable, required when alpha != 0.
    """

    kind: ModelKind
    n_qubits: int
    lam: float | None = None
    g: float | None = None
    delta: float | None = None
    e_c: float = 0.0
    alpha: float = 0.0
    observable: ObservableSpec | None = None

    def __post_init__(self):
        kind = ModelKind(self.kind)
        object.__setattr__(self, "kind", kind)
        if not 2 <= self.n_qubits <= MAX_QUBITS:
            raise ValueError(f"n_qubits must be in [2, {MAX_QUBITS}], got {self.n_qubits}")
        if kind in (ModelKind.DHO, ModelKind.AHO):
            if self.lam is None:
                raise ValueError(f"{kind.value} requires lam")
            if self.g is not None or self.delta is not None:
                raise ValueError(f"{kind.value} does not take g/delta")
            if kind is ModelKind.AHO and self.lam < 0:
                raise ValueError("aho requires lam >= 0 (unbounded below otherwise)")
        else:
            if self.g is None or self.delta is None:
                raise ValueError("psm requires both g and delta")
            if self.delta <= 0:
                raise ValueError(f"psm requires delta > 0, got {self.delta}")
            if self.lam is not None:
                raise ValueError("psm does not take lam")
        if self.alpha != 0.0 and self.observable is None:
            raise ValueError("alpha != 0 requires an observable")
        if self.observable is not None:
            obs = self.observable
            if obs.kind is ObservableKind.PROJECTOR and obs.index >= self.dim:
                raise ValueError(
                    f"projector level {obs.index} outside basis of size {self.dim}"
                )

    @property
    def dim(self) -> int:
        return 2 ** self.n_qubits

    def with_probe(self, observable: ObservableSpec, alpha: float) -> "ModelSpec":
        """Copy of this spec with the probe term replaced."""
        return replace(self, observable=observable, alpha=alpha)


# ------------------------------------------------------------------ build


def build_h0(spec: ModelSpec) -> HermitianOperator:
    """Non-interacting part: diagonal in the level basis for every model."""
    n = np.arange(spec.dim, dtype=np.float64)
    if spec.kind is ModelKind.PSM:
        return HermitianOperator.diagonal(n * spec.delta, label="H0")
    return HermitianOperator.diagonal(n + 0.5, label="H0")


def build_x(dim: int) -> HermitianOperator:
    """Position operator, tridiagonal with <n|x|n+1> = sqrt(n+1)/sqrt(2)."""
    n = np.arange(dim, dtype=np.float64)
    bands = np.zeros((2, dim))
    bands[1, : dim - 1] = np.sqrt(n[1:]) / np.sqrt(2.0)
    return HermitianOperator.from_bands(bands, label="x")


def _x_squared_bands(dim: int) -> np.ndarray:
    """Truncated matrix square of build_x, as symmetric bands (bw=2).

    Computed by explicit band convolution of the tridiagonal x with
    itself, which is exact in floating point for these small products:
        diag:  (2n + 1) / 2        for n <= dim-2,  (dim - 1) / 2 at the
               last row (the n+1 ladder term is cut by the truncation)
        +2:    sqrt((n+1)(n+2)) / 2
    """
    n = np.arange(dim, dtype=np.float64)
    off = np.sqrt(n[1:] + 0.0) / np.sqrt(2.0)  # x_{n-1,n} = sqrt(n)/sqrt(2), n>=1
    up = np.zeros(dim)      # x[n, n+1], defined for n < dim-1
    up[: dim - 1] = off
    lo = np.zeros(dim)      # x[n, n-1], defined for n >= 1
    lo[1:] = off
    bands = np.zeros((3, dim))
    bands[0] = up * up + lo * lo
    bands[2, : dim - 2] = up[: dim - 2] * up[1: dim - 1]
    return bands


def build_h1(spec: ModelSpec) -> HermitianOperator:
    """Interaction part switched on by f(t).

    dho: lam * x, tridiagonal.
    aho: lam * x^4 in closed form with diagonal
         (3/4) lam + (lam/4) * 6 n (n+1), second superdiagonal
         (lam/4) * 2 (2n+3) sqrt((n+1)(n+2)) and fourth superdiagonal
         (lam/4) * sqrt((n+1)(n+2)(n+3)(n+4)).  On the truncated space
         this equals the matrix power x @ x @ x @ x except in the last
         four rows and columns, where the closed form keeps the
         infinite-basis entries that truncation would cut.
    psm: constant g / 2**n_qubits in every matrix entry (dense).
    """
    dim = spec.dim
    if spec.kind is ModelKind.DHO:
        op = build_x(dim) * spec.lam
        return HermitianOperator.from_bands(op.bands, label="H1")
    if spec.kind is ModelKind.AHO:
        lam = spec.lam
        n = np.arange(dim, dtype=np.float64)
        # a dim-4 space has no (i, i+4) pairs, so the fourth band is clipped
        bands = np.zeros((min(5, dim), dim))
        bands[0] = 0.75 * lam + 0.25 * lam * 6.0 * n * (n + 1.0)
        m2 = n[: dim - 2]
        bands[2, : dim - 2] = 0.25 * lam * 2.0 * (2.0 * m2 + 3.0) * np.sqrt(
            (m2 + 1.0) * (m2 + 2.0)
        )
        if dim > 4:
            m4 = n[: dim - 4]
            bands[4, : dim - 4] = 0.25 * lam * np.sqrt(
                (m4 + 1.0) * (m4 + 2.0) * (m4 + 3.0) * (m4 + 4.0)
            )
        return HermitianOperator.from_bands(bands, label="H1")
    # psm: rank-one interaction, every entry g / dim
    return HermitianOperator.from_dense(
        np.full((dim, dim), spec.g / dim), label="H1"
    )


def build_observable(obs: ObservableSpec, dim: int) -> HermitianOperator:
    """Probe observable as an operator on the truncated space."""
    if obs.kind is ObservableKind.X:
        return build_x(dim)
    if obs.kind is ObservableKind.X_SQUARED:
        return HermitianOperator.from_bands(_x_squared_bands(dim), label="x^2")
    if obs.index >= dim:
        raise ValueError(f"projector level {obs.index} outside basis of size {dim}")
    diag = np.zeros(dim)
    diag[obs.index] = 1.0
    return HermitianOperator.diagonal(diag, label=f"P{obs.index}")


def switched_part(spec: ModelSpec) -> HermitianOperator:
    """H1 + alpha * O, the full operator multiplied by f(t)."""
    op = build_h1(spec)
    if spec.alpha != 0.0:
        op = op + spec.alpha * build_observable(spec.observable, spec.dim)
    return op


def assemble(spec: ModelSpec, f_value: float) -> HermitianOperator:
    """H(f) = H0 + f * (H1 + alpha * O) + e_c * I at fixed f."""
    if not 0.0 <= f_value <= 1.0:
        raise ValueError(f"switching factor must lie in [0, 1], got {f_value}")
    op = build_h0(spec) + f_value * switched_part(spec)
    if spec.e_c != 0.0:
        op = op.shifted(spec.e_c)
    return op
