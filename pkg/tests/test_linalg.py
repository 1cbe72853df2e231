import numpy as np
import pytest

from ctcsim.linalg import (
    check_density_operator,
    check_unitary,
    hermitian_eigensystem,
    ket,
    kron,
    partial_trace,
    projector,
    trace_distance,
    von_neumann_entropy,
)

from helpers import random_density

I2 = np.eye(2, dtype=complex)
H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
X = np.array([[0, 1], [1, 0]], dtype=complex)


def test_kron_identity():
    assert np.array_equal(kron(I2, I2), np.eye(4))


def test_kron_basis_projector_placement():
    # big-endian: the first factor is the most significant qubit
    got = kron(projector("0"), projector("1"))
    assert np.array_equal(got, np.diag([0.0, 1.0, 0.0, 0.0]).astype(complex))


def test_kron_entry_table_against_index_oracle():
    got = kron(H, X)
    # independent four-nested-loop oracle for the block structure
    expected = np.zeros((4, 4), dtype=complex)
    for i in range(2):
        for j in range(2):
            for k in range(2):
                for l in range(2):
                    expected[i * 2 + k, j * 2 + l] = H[i, j] * X[k, l]
    assert np.array_equal(got, expected)


def test_kron_associative_on_random_triples():
    rng = np.random.default_rng(7)
    for _ in range(20):
        a = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
        b = rng.normal(size=(3, 2)) + 1j * rng.normal(size=(3, 2))
        c = rng.normal(size=(2, 3)) + 1j * rng.normal(size=(2, 3))
        left = kron(kron(a, b), c)
        right = kron(a, kron(b, c))
        assert np.max(np.abs(left - right)) <= 1e-12


def test_partial_trace_factors_product_state():
    rng = np.random.default_rng(11)
    for _ in range(10):
        rho_a = random_density(rng, 2)
        rho_b = random_density(rng, 4)
        got = partial_trace(kron(rho_a, rho_b), [2, 4], keep=(0,))
        assert np.max(np.abs(got - rho_a)) <= 1e-12


def test_partial_trace_singlet_half_is_maximally_mixed():
    psi = (ket("01") - ket("10")) / np.sqrt(2)
    rho = np.outer(psi, psi.conj())
    got = partial_trace(rho, [2, 2], keep=(1,))
    assert np.max(np.abs(got - I2 / 2)) <= 1e-12


def test_partial_trace_against_double_index_oracle():
    rng = np.random.default_rng(13)
    rho = random_density(rng, 4)
    # brute-force index summation for a two-qubit state
    keep0 = np.zeros((2, 2), dtype=complex)
    keep1 = np.zeros((2, 2), dtype=complex)
    for i in range(2):
        for j in range(2):
            for k in range(2):
                keep0[i, j] += rho[i * 2 + k, j * 2 + k]
                keep1[i, j] += rho[k * 2 + i, k * 2 + j]
    assert np.max(np.abs(partial_trace(rho, [2, 2], keep=(0,)) - keep0)) <= 1e-12
    assert np.max(np.abs(partial_trace(rho, [2, 2], keep=(1,)) - keep1)) <= 1e-12


def test_partial_trace_keep_everything_returns_input_exactly():
    rng = np.random.default_rng(17)
    rho = random_density(rng, 8)
    got = partial_trace(rho, [2, 2, 2], keep=(0, 1, 2))
    assert np.array_equal(got, rho)


def test_partial_trace_preserves_trace():
    rng = np.random.default_rng(19)
    rho = random_density(rng, 12)
    for keep in [(0,), (1,), (2,), (0, 2), (1, 2)]:
        reduced = partial_trace(rho, [2, 3, 2], keep=keep)
        assert abs(np.trace(reduced) - np.trace(rho)) <= 1e-12


def test_partial_trace_rejects_dimension_mismatch():
    with pytest.raises(ValueError, match=r"require 8x8"):
        partial_trace(np.eye(4), [2, 2, 2], keep=(0,))


def test_partial_trace_rejects_bad_keep():
    with pytest.raises(ValueError, match="at least one"):
        partial_trace(np.eye(4), [2, 2], keep=())
    with pytest.raises(ValueError, match="out of range"):
        partial_trace(np.eye(4), [2, 2], keep=(5,))


def test_trace_distance_of_state_with_itself_is_zero():
    rng = np.random.default_rng(23)
    rho = random_density(rng, 4)
    assert trace_distance(rho, rho) == 0.0


def test_trace_distance_orthogonal_pure_states():
    assert trace_distance(projector("0"), projector("1")) == pytest.approx(1.0, abs=1e-12)


def test_trace_distance_zero_vs_plus_matches_eigenvalue_oracle():
    # 2x2 Hermitian eigenvalues by the closed quadratic formula
    d = projector("0") - projector("+")
    a, b, c = d[0, 0].real, d[1, 1].real, d[0, 1]
    disc = np.sqrt(((a - b) / 2) ** 2 + abs(c) ** 2)
    expected = 0.5 * (abs((a + b) / 2 + disc) + abs((a + b) / 2 - disc))
    assert expected == pytest.approx(1 / np.sqrt(2), abs=1e-15)
    assert trace_distance(projector("0"), projector("+")) == pytest.approx(
        expected, abs=1e-12
    )


def test_trace_distance_rejects_dimension_mismatch():
    with pytest.raises(ValueError, match="mismatch"):
        trace_distance(np.eye(2) / 2, np.eye(4) / 4)


def test_trace_distance_triangle_inequality():
    rng = np.random.default_rng(29)
    for _ in range(30):
        a, b, c = (random_density(rng, 4) for _ in range(3))
        assert trace_distance(a, c) <= trace_distance(a, b) + trace_distance(b, c) + 1e-10


def test_entropy_pure_state_is_zero():
    assert von_neumann_entropy(projector("+")) == pytest.approx(0.0, abs=1e-9)


def test_entropy_maximally_mixed_qubit_is_one_bit():
    assert von_neumann_entropy(I2 / 2) == pytest.approx(1.0, abs=1e-12)


def test_entropy_diagonal_three_quarters():
    expected = -(0.75 * np.log2(0.75) + 0.25 * np.log2(0.25))
    got = von_neumann_entropy(np.diag([0.75, 0.25]).astype(complex))
    assert got == pytest.approx(expected, abs=1e-12)


def test_eigensystem_reconstructs_hermitian_input():
    rng = np.random.default_rng(31)
    for _ in range(20):
        g = rng.normal(size=(6, 6)) + 1j * rng.normal(size=(6, 6))
        herm = (g + g.conj().T) / 2
        w, v = hermitian_eigensystem(herm)
        rebuilt = (v * w) @ v.conj().T
        assert np.max(np.abs(rebuilt - herm)) <= 1e-9


def test_check_density_operator_accepts_valid_states():
    rng = np.random.default_rng(37)
    for dim in (2, 4, 8):
        check_density_operator(random_density(rng, dim))


def test_check_density_operator_rejects_bad_states():
    with pytest.raises(ValueError, match="Hermitian"):
        check_density_operator(np.array([[0.5, 0.5], [0.0, 0.5]]))
    with pytest.raises(ValueError, match="trace"):
        check_density_operator(np.eye(2))
    with pytest.raises(ValueError, match="positive"):
        check_density_operator(np.diag([1.5, -0.5]).astype(complex))
    with pytest.raises(ValueError, match="finite"):
        check_density_operator(np.array([[np.nan, 0], [0, 1]]))


def test_check_unitary():
    check_unitary(H)
    with pytest.raises(ValueError, match="unitary"):
        check_unitary(np.array([[1, 0], [0, 0.5]]))


def test_ket_rejects_unknown_labels():
    with pytest.raises(ValueError, match="valid characters"):
        ket("02")
    with pytest.raises(ValueError, match="at least one"):
        ket("")
