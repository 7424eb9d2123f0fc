import numpy as np
import pytest

from vqclassifier.errors import CapacityError, EncodingError
from vqclassifier.statevector import (
    QuantumState,
    apply_cnot,
    apply_rotation,
    expect_z,
    load_amplitudes,
    zero_state,
)

from oracles import cnot_matrix, embed_single, rotation_gate


def basis_state(n, index):
    amps = np.zeros(2**n, dtype=complex)
    amps[index] = 1.0
    return QuantumState(n, amps)


def test_zero_state_single_qubit():
    assert np.array_equal(zero_state(1).amplitudes, [1, 0])


def test_zero_state_two_qubits():
    assert np.array_equal(zero_state(2).amplitudes, [1, 0, 0, 0])


def test_zero_state_ten_qubits():
    s = zero_state(10)
    assert s.amplitudes.shape == (1024,)
    assert s.amplitudes[0] == 1.0
    assert np.count_nonzero(s.amplitudes) == 1


@pytest.mark.parametrize("n", [0, -3, 25])
def test_zero_state_capacity_guard(n):
    with pytest.raises(CapacityError):
        zero_state(n)


def test_identity_rotation_is_noop():
    s = apply_rotation(zero_state(1), 0, "X", 0.0)
    assert np.allclose(s.amplitudes, [1, 0], atol=1e-15)


def test_rx_pi_flips_to_minus_i_one():
    s = apply_rotation(zero_state(1), 0, "X", np.pi)
    assert np.allclose(s.amplitudes, [0, -1j], atol=1e-15)


def test_rx_half_pi_equal_superposition():
    s = apply_rotation(zero_state(1), 0, "X", np.pi / 2)
    assert np.allclose(s.amplitudes, [1 / np.sqrt(2), -1j / np.sqrt(2)], atol=1e-15)


def test_rotation_qubit_out_of_range():
    with pytest.raises(IndexError):
        apply_rotation(zero_state(2), 2, "X", 0.1)


@pytest.mark.parametrize("theta", [np.nan, np.inf, -np.inf])
def test_rotation_nonfinite_angle(theta):
    with pytest.raises(ValueError):
        apply_rotation(zero_state(1), 0, "Y", theta)


def test_rotation_unknown_axis():
    with pytest.raises(ValueError):
        apply_rotation(zero_state(1), 0, "Q", 0.1)


def test_cnot_truth_table():
    # |10> has qubit 0 (MSB) set -> target flips to |11>
    assert np.array_equal(apply_cnot(basis_state(2, 0b10), 0, 1).amplitudes, basis_state(2, 0b11).amplitudes)
    assert np.array_equal(apply_cnot(basis_state(2, 0b00), 0, 1).amplitudes, basis_state(2, 0b00).amplitudes)


def test_cnot_builds_bell_state():
    plus = QuantumState(2, np.array([1, 0, 1, 0]) / np.sqrt(2))
    bell = apply_cnot(plus, 0, 1)
    assert np.allclose(bell.amplitudes, np.array([1, 0, 0, 1]) / np.sqrt(2), atol=1e-15)


def test_cnot_control_equals_target():
    with pytest.raises(ValueError):
        apply_cnot(zero_state(2), 1, 1)


def test_expect_z_examples():
    assert expect_z(zero_state(1), 0) == 1.0
    assert expect_z(apply_rotation(zero_state(1), 0, "X", np.pi), 0) == -1.0
    assert abs(expect_z(apply_rotation(zero_state(1), 0, "X", np.pi / 2), 0)) < 1e-12


def test_expect_z_out_of_range():
    with pytest.raises(IndexError):
        expect_z(zero_state(2), 5)


def test_load_amplitudes_checks():
    s = load_amplitudes([0.6, 0.8])
    assert s.num_qubits == 1
    assert np.allclose(s.amplitudes, [0.6, 0.8])
    assert np.all(s.amplitudes.imag == 0.0)
    with pytest.raises(EncodingError):
        load_amplitudes([0.5, 0.5, 0.5])  # not a power of two
    with pytest.raises(EncodingError):
        load_amplitudes([0.5, 0.5, 0.5, 0.6])  # norm != 1


def random_gate_sequence(rng, n, length):
    ops = []
    for _ in range(length):
        if n > 1 and rng.random() < 0.4:
            q = int(rng.integers(0, n))
            t = int(rng.integers(0, n - 1))
            t = t if t < q else t + 1
            ops.append(("cnot", q, t))
        else:
            ops.append(("rot", int(rng.integers(0, n)), "XYZ"[rng.integers(0, 3)], rng.uniform(-7, 7)))
    return ops


def run_sequence(state, ops):
    for op in ops:
        if op[0] == "cnot":
            state = apply_cnot(state, op[1], op[2])
        else:
            state = apply_rotation(state, op[1], op[2], op[3])
    return state


def test_norm_conserved_under_random_sequences():
    rng = np.random.default_rng(11)
    for _ in range(25):
        n = int(rng.integers(1, 6))
        s = zero_state(n)
        s = run_sequence(s, random_gate_sequence(rng, n, 30))
        assert abs(np.sum(np.abs(s.amplitudes) ** 2) - 1.0) < 1e-10


def test_rotation_unitarity_roundtrip():
    rng = np.random.default_rng(12)
    for _ in range(30):
        n = int(rng.integers(1, 5))
        s = run_sequence(zero_state(n), random_gate_sequence(rng, n, 10))
        q = int(rng.integers(0, n))
        axis = "XYZ"[rng.integers(0, 3)]
        theta = rng.uniform(-7, 7)
        back = apply_rotation(apply_rotation(s, q, axis, theta), q, axis, -theta)
        assert np.abs(back.amplitudes - s.amplitudes).max() < 1e-12


def test_cnot_involution_exact():
    rng = np.random.default_rng(13)
    for _ in range(20):
        n = int(rng.integers(2, 5))
        s = run_sequence(zero_state(n), random_gate_sequence(rng, n, 10))
        c = int(rng.integers(0, n))
        t = int(rng.integers(0, n - 1))
        t = t if t < c else t + 1
        back = apply_cnot(apply_cnot(s, c, t), c, t)
        assert np.abs(back.amplitudes - s.amplitudes).max() <= 1e-15


def test_expect_z_always_bounded():
    rng = np.random.default_rng(14)
    for _ in range(20):
        n = int(rng.integers(1, 5))
        s = run_sequence(zero_state(n), random_gate_sequence(rng, n, 25))
        for q in range(n):
            assert -1.0 <= expect_z(s, q) <= 1.0


def test_gates_match_matrix_oracle():
    rng = np.random.default_rng(15)
    for _ in range(40):
        n = int(rng.integers(1, 4))
        s = run_sequence(zero_state(n), random_gate_sequence(rng, n, 6))
        vec = s.amplitudes.copy()
        if n > 1 and rng.random() < 0.5:
            c = int(rng.integers(0, n))
            t = int(rng.integers(0, n - 1))
            t = t if t < c else t + 1
            got = apply_cnot(s, c, t).amplitudes
            want = cnot_matrix(n, c, t) @ vec
        else:
            q = int(rng.integers(0, n))
            axis = "XYZ"[rng.integers(0, 3)]
            theta = rng.uniform(-7, 7)
            got = apply_rotation(s, q, axis, theta).amplitudes
            want = embed_single(rotation_gate(axis, theta), q, n) @ vec
        assert np.abs(got - want).max() < 1e-12


def test_builder_chain_mutates_in_place():
    s = zero_state(2)
    out = s.rotate(0, "Y", np.pi / 2).cnot(0, 1)
    assert out is s
    assert np.allclose(s.amplitudes, np.array([1, 0, 0, 1]) / np.sqrt(2), atol=1e-15)
