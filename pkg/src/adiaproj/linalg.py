"""State vectors and Hermitian operators on a truncated number basis.

States are complex amplitude vectors over ``dim = 2**n_qubits`` basis
levels.  Operators are real-symmetric in every model built here, so they
are stored either as dense square arrays or, when only a few diagonals
are populated, in a compact symmetric-banded layout:

    bands[k, i] = A[i, i + k]        for 0 <= k <= bandwidth

Row ``k`` holds the k-th superdiagonal left-aligned and zero-padded on
the right.  The subdiagonals are implied by symmetry, so banded storage
cannot represent a non-Hermitian matrix at all.

Everything in this module is immutable after construction: arrays are
copied in and marked read-only, and all algebra returns new objects.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from numbers import Real

import numpy as np

# Tolerances used by the whole package, kept in one place.
NORM_ATOL = 1e-12          # |<psi|psi> - 1| for "normalized"
IMAG_RTOL = 1e-12          # residual imaginary part allowed in expectations
HERMITICITY_ATOL = 1e-14   # elementwise, relative to the largest entry


def _require_power_of_two(dim: int) -> None:
    if dim < 2 or (dim & (dim - 1)) != 0:
        raise ValueError(f"dimension must be a power of two >= 2, got {dim}")


def _readonly(a: np.ndarray) -> np.ndarray:
    out = np.array(a, copy=True, order="C")
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class QuantumState:
    """Complex amplitude vector over a truncated basis.

    Attributes:
        dim: Basis size, a power of two >= 2.
        amplitudes: Read-only complex128 array of length ``dim``.
    """

    dim: int
    amplitudes: np.ndarray

    def __post_init__(self):
        _require_power_of_two(self.dim)
        amp = np.asarray(self.amplitudes, dtype=np.complex128)
        if amp.shape != (self.dim,):
            raise ValueError(
                f"amplitudes shape {amp.shape} does not match dim {self.dim}"
            )
        if not np.all(np.isfinite(amp.view(np.float64))):
            raise ValueError("amplitudes contain NaN or Inf")
        object.__setattr__(self, "amplitudes", _readonly(amp))

    @classmethod
    def from_amplitudes(cls, amplitudes) -> "QuantumState":
        amp = np.asarray(amplitudes, dtype=np.complex128)
        return cls(dim=amp.shape[0] if amp.ndim == 1 else -1, amplitudes=amp)

    @classmethod
    def basis(cls, dim: int, n: int) -> "QuantumState":
        """Basis state |n> in a space of size ``dim``."""
        _require_power_of_two(dim)
        if not 0 <= n < dim:
            raise ValueError(f"basis index {n} outside [0, {dim})")
        amp = np.zeros(dim, dtype=np.complex128)
        amp[n] = 1.0
        return cls(dim=dim, amplitudes=amp)

    @property
    def norm_sq(self) -> float:
        a = self.amplitudes
        return float(np.real(np.vdot(a, a)))

    @property
    def norm(self) -> float:
        return float(np.sqrt(self.norm_sq))

    @property
    def is_normalized(self) -> bool:
        return abs(self.norm_sq - 1.0) <= NORM_ATOL

    @property
    def probabilities(self) -> np.ndarray:
        """Occupation probabilities |a_n|^2 (not renormalized)."""
        return np.abs(self.amplitudes) ** 2

    def normalized(self) -> "QuantumState":
        n = self.norm
        if n == 0.0:
            raise ValueError("cannot normalize the zero vector")
        return QuantumState(self.dim, self.amplitudes / n)

    def overlap_probability(self, other: "QuantumState") -> float:
        """|<self|other>|^2 with both sides normalized."""
        num = abs(np.vdot(self.amplitudes, other.amplitudes)) ** 2
        return float(num / (self.norm_sq * other.norm_sq))


@dataclass(frozen=True)
class HermitianOperator:
    """Hermitian operator in dense or symmetric-banded storage.

    Exactly one of ``dense`` and ``bands`` is set.  Banded storage is
    Hermitian by construction; dense storage is checked elementwise at
    build time against ``HERMITICITY_ATOL`` scaled by the largest entry.

    Attributes:
        dim: Matrix dimension (power of two >= 2).
        label: Short human-readable tag carried through algebra.
        dense: Optional (dim, dim) array, float64 or complex128.
        bands: Optional (bandwidth + 1, dim) float64 array.
    """

    dim: int
    label: str = ""
    dense: np.ndarray | None = None
    bands: np.ndarray | None = None

    def __post_init__(self):
        _require_power_of_two(self.dim)
        if (self.dense is None) == (self.bands is None):
            raise ValueError("exactly one of dense/bands must be given")
        if self.dense is not None:
            m = np.asarray(self.dense)
            if m.dtype not in (np.float64, np.complex128):
                m = m.astype(np.complex128 if np.iscomplexobj(m) else np.float64)
            if m.shape != (self.dim, self.dim):
                raise ValueError(f"dense shape {m.shape} != ({self.dim}, {self.dim})")
            if not np.all(np.isfinite(m.view(np.float64) if m.dtype == np.complex128 else m)):
                raise ValueError("operator entries contain NaN or Inf")
            scale = max(1.0, float(np.max(np.abs(m))))
            err = float(np.max(np.abs(m - m.conj().T)))
            if err > HERMITICITY_ATOL * scale:
                raise ValueError(
                    f"non-Hermitian dense storage: max |A - A^dag| = {err:.3e}"
                )
            object.__setattr__(self, "dense", _readonly(m))
        else:
            b = np.asarray(self.bands, dtype=np.float64)
            if b.ndim != 2 or b.shape[1] != self.dim or b.shape[0] < 1:
                raise ValueError(f"bands shape {b.shape} incompatible with dim {self.dim}")
            if b.shape[0] > self.dim:
                raise ValueError("more bands than matrix rows")
            if not np.all(np.isfinite(b)):
                raise ValueError("operator entries contain NaN or Inf")
            # Entries past the end of superdiagonal k are padding; force zero.
            b = b.copy()
            for k in range(1, b.shape[0]):
                b[k, self.dim - k:] = 0.0
            object.__setattr__(self, "bands", _readonly(b))

    # ---------------------------------------------------------------- build

    @classmethod
    def from_dense(cls, matrix, label: str = "") -> "HermitianOperator":
        m = np.asarray(matrix)
        return cls(dim=m.shape[0], label=label, dense=m)

    @classmethod
    def from_bands(cls, bands, label: str = "") -> "HermitianOperator":
        b = np.asarray(bands, dtype=np.float64)
        return cls(dim=b.shape[1], label=label, bands=b)

    @classmethod
    def diagonal(cls, values, label: str = "") -> "HermitianOperator":
        v = np.asarray(values, dtype=np.float64)
        return cls.from_bands(v.reshape(1, -1), label=label)

    @classmethod
    def identity(cls, dim: int) -> "HermitianOperator":
        return cls.diagonal(np.ones(dim), label="I")

    # ------------------------------------------------------------ inspect

    @property
    def is_banded(self) -> bool:
        return self.bands is not None

    @property
    def bandwidth(self) -> int | None:
        """Number of stored superdiagonals, or None for dense storage."""
        return None if self.bands is None else self.bands.shape[0] - 1

    def to_dense(self) -> np.ndarray:
        """Materialize a full square array (float64 for banded storage)."""
        if self.dense is not None:
            return self.dense.copy()
        m = np.zeros((self.dim, self.dim))
        b = self.bands
        m[np.arange(self.dim), np.arange(self.dim)] = b[0]
        for k in range(1, b.shape[0]):
            idx = np.arange(self.dim - k)
            m[idx, idx + k] = b[k, : self.dim - k]
            m[idx + k, idx] = b[k, : self.dim - k]
        return m

    def hermiticity_error(self) -> float:
        """max |A[m,n] - conj(A[n,m])|; exactly 0.0 for banded storage."""
        if self.bands is not None:
            return 0.0
        return float(np.max(np.abs(self.dense - self.dense.conj().T)))

    def gershgorin_bound(self) -> float:
        """Upper bound on max |eigenvalue| from Gershgorin discs."""
        m = self.dense if self.dense is not None else None
        if m is None:
            # Radii from explicit superdiagonals plus mirrored subdiagonals.
            b = self.bands
            radii = np.zeros(self.dim)
            for k in range(1, b.shape[0]):
                v = np.abs(b[k, : self.dim - k])
                radii[: self.dim - k] += v
                radii[k:] += v
            centers = np.abs(b[0])
        else:
            centers = np.abs(np.diagonal(m).real)
            radii = np.sum(np.abs(m), axis=1) - np.abs(np.diagonal(m))
        return float(np.max(centers + radii))

    # ------------------------------------------------------------- algebra

    def __add__(self, other: "HermitianOperator") -> "HermitianOperator":
        if not isinstance(other, HermitianOperator):
            return NotImplemented
        if other.dim != self.dim:
            raise ValueError(f"dimension mismatch: {self.dim} vs {other.dim}")
        label = f"{self.label}+{other.label}" if self.label and other.label else ""
        if self.is_banded and other.is_banded:
            nb = max(self.bands.shape[0], other.bands.shape[0])
            b = np.zeros((nb, self.dim))
            b[: self.bands.shape[0]] += self.bands
            b[: other.bands.shape[0]] += other.bands
            return HermitianOperator.from_bands(b, label=label)
        return HermitianOperator.from_dense(self.to_dense() + other.to_dense(), label=label)

    def __mul__(self, c) -> "HermitianOperator":
        if not isinstance(c, Real):
            return NotImplemented
        c = float(c)
        if self.is_banded:
            return HermitianOperator.from_bands(c * self.bands, label=self.label)
        return HermitianOperator.from_dense(c * self.dense, label=self.label)

    __rmul__ = __mul__

    def shifted(self, c: float) -> "HermitianOperator":
        """Return self + c * identity."""
        if self.is_banded:
            b = self.bands.copy()
            b[0] += c
            return HermitianOperator.from_bands(b, label=self.label)
        m = self.to_dense()
        m[np.arange(self.dim), np.arange(self.dim)] += c
        return HermitianOperator.from_dense(m, label=self.label)


# -------------------------------------------------------------------- ops


def _apply_bands_real(bands: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Symmetric banded matvec on a real or complex vector."""
    n = x.shape[0]
    y = bands[0] * x
    for k in range(1, bands.shape[0]):
        v = bands[k, : n - k]
        y[: n - k] += v * x[k:]
        y[k:] += v * x[: n - k]
    return y


def apply(op: HermitianOperator, psi: QuantumState) -> QuantumState:
    """Apply an operator to a state, returning a new (unnormalized) state.

    Real-valued storage acts separately on the real and imaginary parts
    so no complex widening of the operator ever happens.
    """
    if op.dim != psi.dim:
        raise ValueError(f"dimension mismatch: operator {op.dim}, state {psi.dim}")
    x = psi.amplitudes
    if op.is_banded:
        y = _apply_bands_real(op.bands, x.real) + 1j * _apply_bands_real(op.bands, x.imag)
    elif op.dense.dtype == np.float64:
        y = op.dense @ x.real + 1j * (op.dense @ x.imag)
    else:
        y = op.dense @ x
    return QuantumState(psi.dim, y)


def inner(psi: QuantumState, phi: QuantumState) -> complex:
    """<psi|phi> with the conjugate on the first argument."""
    if psi.dim != phi.dim:
        raise ValueError(f"dimension mismatch: {psi.dim} vs {phi.dim}")
    return complex(np.vdot(psi.amplitudes, phi.amplitudes))


def expectation(op: HermitianOperator, psi: QuantumState) -> float:
    """<psi|A|psi> / <psi|psi>, guaranteed real.

    Raises:
        ValueError: on dimension mismatch, zero norm, or if the residual
            imaginary part exceeds ``IMAG_RTOL`` relative to the result.
    """
    ns = psi.norm_sq
    if ns == 0.0:
        raise ValueError("expectation undefined for the zero vector")
    raw = inner(psi, apply(op, psi)) / ns
    if abs(raw.imag) > IMAG_RTOL * max(1.0, abs(raw.real)):
        raise ValueError(
            f"expectation has imaginary residue {raw.imag:.3e}; "
            "operator storage is not Hermitian enough"
        )
    return float(raw.real)
