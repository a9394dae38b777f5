"""State and operator primitives against naive dense references."""

import numpy as np
import pytest

from adiaproj import HermitianOperator, QuantumState, apply, expectation, inner
from conftest import naive_matvec, random_state


def _random_banded(dim, bandwidth, seed):
    rng = np.random.default_rng(seed)
    bands = rng.normal(size=(bandwidth + 1, dim))
    return HermitianOperator.from_bands(bands, label="rnd")


# ----------------------------------------------------------------- states


def test_basis_state():
    s = QuantumState.basis(8, 3)
    assert s.dim == 8
    assert s.amplitudes[3] == 1.0
    assert s.norm == 1.0
    assert s.is_normalized
    np.testing.assert_array_equal(s.probabilities, np.eye(8)[3])


def test_state_dimension_must_be_power_of_two():
    with pytest.raises(ValueError):
        QuantumState.basis(6, 0)
    with pytest.raises(ValueError):
        QuantumState.basis(1, 0)
    with pytest.raises(ValueError):
        QuantumState.basis(8, 8)


def test_state_rejects_nan_and_shape_mismatch():
    with pytest.raises(ValueError):
        QuantumState(4, np.array([1.0, np.nan, 0.0, 0.0]))
    with pytest.raises(ValueError):
        QuantumState(4, np.zeros(5))


def test_amplitudes_are_read_only():
    s = QuantumState.basis(4, 0)
    with pytest.raises(ValueError):
        s.amplitudes[0] = 0.0


def test_normalized_and_overlap():
    v = np.array([3.0, 4.0j, 0.0, 0.0])
    s = QuantumState.from_amplitudes(v)
    assert s.norm == pytest.approx(5.0)
    n = s.normalized()
    assert n.is_normalized
    # overlap_probability normalizes both sides itself
    assert s.overlap_probability(n) == pytest.approx(1.0, abs=1e-14)
    assert QuantumState.basis(4, 0).overlap_probability(QuantumState.basis(4, 1)) == 0.0


def test_normalizing_zero_vector_fails():
    with pytest.raises(ValueError):
        QuantumState(4, np.zeros(4)).normalized()


# -------------------------------------------------------------- operators


def test_banded_layout_round_trip():
    # bands[k, i] = A[i, i+k]; padding forced to zero
    bands = np.array([[1.0, 2.0, 3.0, 4.0], [0.5, 0.6, 0.7, 99.0]])
    op = HermitianOperator.from_bands(bands)
    assert op.is_banded and op.bandwidth == 1
    m = op.to_dense()
    expected = np.array(
        [
            [1.0, 0.5, 0.0, 0.0],
            [0.5, 2.0, 0.6, 0.0],
            [0.0, 0.6, 3.0, 0.7],
            [0.0, 0.0, 0.7, 4.0],
        ]
    )
    np.testing.assert_array_equal(m, expected)
    assert op.bands[1, 3] == 0.0  # the 99.0 was padding
    assert op.hermiticity_error() == 0.0


def test_dense_round_trip_and_hermiticity_check():
    rng = np.random.default_rng(7)
    a = rng.normal(size=(8, 8))
    sym = (a + a.T) / 2
    op = HermitianOperator.from_dense(sym)
    np.testing.assert_array_equal(op.to_dense(), sym)
    assert op.hermiticity_error() == 0.0
    a[0, 1] += 1.0
    with pytest.raises(ValueError, match="non-Hermitian"):
        HermitianOperator.from_dense(a)


def test_exactly_one_storage_kind():
    with pytest.raises(ValueError):
        HermitianOperator(dim=4)
    with pytest.raises(ValueError):
        HermitianOperator(dim=4, dense=np.eye(4), bands=np.ones((1, 4)))


def test_diagonal_and_identity():
    d = HermitianOperator.diagonal([1.0, 2.0, 3.0, 4.0])
    np.testing.assert_array_equal(d.to_dense(), np.diag([1.0, 2.0, 3.0, 4.0]))
    np.testing.assert_array_equal(
        HermitianOperator.identity(4).to_dense(), np.eye(4)
    )


def test_gershgorin_bounds_every_eigenvalue():
    for seed in range(5):
        op = _random_banded(16, 3, seed)
        eigs = np.linalg.eigvalsh(op.to_dense())
        assert op.gershgorin_bound() >= np.max(np.abs(eigs))
        dense_op = HermitianOperator.from_dense(op.to_dense())
        assert dense_op.gershgorin_bound() == pytest.approx(op.gershgorin_bound())


def test_addition_keeps_banded_storage():
    a = _random_banded(8, 1, 0)
    b = _random_banded(8, 2, 1)
    c = a + b
    assert c.is_banded and c.bandwidth == 2
    np.testing.assert_allclose(c.to_dense(), a.to_dense() + b.to_dense(), atol=1e-15)
    d = a + HermitianOperator.from_dense(b.to_dense())
    assert not d.is_banded
    np.testing.assert_allclose(d.to_dense(), c.to_dense(), atol=1e-15)


def test_addition_dimension_mismatch():
    with pytest.raises(ValueError):
        _random_banded(8, 1, 0) + _random_banded(4, 1, 0)


def test_scalar_multiply_and_shift():
    op = _random_banded(8, 2, 3)
    np.testing.assert_allclose((2.5 * op).to_dense(), 2.5 * op.to_dense(), atol=1e-15)
    np.testing.assert_allclose((op * -1).to_dense(), -op.to_dense(), atol=1e-15)
    shifted = op.shifted(0.75)
    np.testing.assert_allclose(
        shifted.to_dense(), op.to_dense() + 0.75 * np.eye(8), atol=1e-15
    )
    dense_shift = HermitianOperator.from_dense(op.to_dense()).shifted(0.75)
    np.testing.assert_allclose(dense_shift.to_dense(), shifted.to_dense(), atol=1e-15)


# -------------------------------------------------------------- application


def test_banded_apply_matches_naive_matvec():
    for seed in range(4):
        op = _random_banded(16, 4, 10 + seed)
        v = random_state(16, 100 + seed)
        got = apply(op, QuantumState.from_amplitudes(v)).amplitudes
        want = naive_matvec(op.to_dense().astype(complex), v)
        np.testing.assert_allclose(got, want, atol=1e-13)


def test_dense_apply_matches_naive_matvec():
    rng = np.random.default_rng(42)
    a = rng.normal(size=(8, 8))
    op = HermitianOperator.from_dense((a + a.T) / 2)
    v = random_state(8, 5)
    got = apply(op, QuantumState.from_amplitudes(v)).amplitudes
    np.testing.assert_allclose(got, naive_matvec(op.to_dense().astype(complex), v), atol=1e-13)


def test_apply_dimension_mismatch():
    with pytest.raises(ValueError):
        apply(_random_banded(8, 1, 0), QuantumState.basis(4, 0))


def test_inner_conjugates_first_argument():
    a = QuantumState.from_amplitudes([1.0, 1.0j, 0.0, 0.0])
    b = QuantumState.from_amplitudes([1.0, 1.0, 0.0, 0.0])
    assert inner(a, b) == pytest.approx(1.0 - 1.0j)
    assert inner(b, a) == pytest.approx(1.0 + 1.0j)


def test_expectation_matches_quadratic_form():
    op = _random_banded(16, 3, 21)
    v = random_state(16, 22)
    m = op.to_dense()
    want = float(np.real(np.conj(v) @ (m @ v)))
    got = expectation(op, QuantumState.from_amplitudes(v))
    assert got == pytest.approx(want, abs=1e-13)
    # scale invariance: expectation divides by the squared norm
    got2 = expectation(op, QuantumState.from_amplitudes(3.0 * v))
    assert got2 == pytest.approx(want, abs=1e-13)


def test_expectation_rejects_zero_vector():
    with pytest.raises(ValueError):
        expectation(_random_banded(4, 1, 0), QuantumState(4, np.zeros(4)))
