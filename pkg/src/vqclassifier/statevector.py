"""Dense statevector simulation of small n-qubit systems.

Conventions used throughout the package:

* Basis index ``i`` of ``amplitudes[i]`` is read with **qubit 0 as the most
  significant bit**, so for two qubits the order is |00>, |01>, |10>, |11>
  and qubit 0 owns the leading bit.
* States hold ``2**n`` complex128 amplitudes and stay normalized to 1
  (within 1e-10) under every gate defined here.

Gates mutate a state in place through the builder-style methods
(``state.rotate(...).cnot(...)``); the module-level functions are the pure
copies used by the rest of the package and by the tests.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import cos, sin

import numpy as np

from .errors import CapacityError, EncodingError

MAX_QUBITS = 24  # keeps the worst-case state under ~256 MiB

AXES = ("X", "Y", "Z")


def _rotation_matrix(axis: str, theta: float) -> np.ndarray:
    """2x2 unitary exp(-i * theta/2 * P) for P in {X, Y, Z}."""
    c, s = cos(theta / 2.0), sin(theta / 2.0)
    if axis == "X":
        return np.array([[c, -1j * s], [-1j * s, c]], dtype=complex)
    if axis == "Y":
        return np.array([[c, -s], [s, c]], dtype=complex)
    if axis == "Z":
        return np.array([[c - 1j * s, 0.0], [0.0, c + 1j * s]], dtype=complex)
    raise ValueError(f"unknown rotation axis {axis!r}, expected one of {AXES}")


@dataclass
class QuantumState:
    """Amplitude vector over the 2**num_qubits computational basis states."""

    num_qubits: int
    amplitudes: np.ndarray

    def __post_init__(self):
        if not 1 <= self.num_qubits <= MAX_QUBITS:
            raise CapacityError(
                f"num_qubits must be in [1, {MAX_QUBITS}], got {self.num_qubits}"
            )
        self.amplitudes = np.asarray(self.amplitudes, dtype=complex)
        if self.amplitudes.shape != (2**self.num_qubits,):
            raise EncodingError(
                f"expected {2**self.num_qubits} amplitudes, got {self.amplitudes.shape}"
            )

    def copy(self) -> "QuantumState":
        return QuantumState(self.num_qubits, self.amplitudes.copy())

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def _tensor(self) -> np.ndarray:
        # Axis q of the reshaped view is qubit q (MSB-first convention).
        return self.amplitudes.reshape((2,) * self.num_qubits)

    def _check_qubit(self, qubit: int) -> None:
        if not 0 <= qubit < self.num_qubits:
            raise IndexError(f"qubit {qubit} out of range for {self.num_qubits} qubits")

    def rotate(self, qubit: int, axis: str, theta: float) -> "QuantumState":
        """Apply a single-qubit rotation in place; returns self for chaining."""
        self._check_qubit(qubit)
        if not np.isfinite(theta):
            raise ValueError(f"rotation angle must be finite, got {theta}")
        u = _rotation_matrix(axis, float(theta))
        t = np.tensordot(u, self._tensor(), axes=([1], [qubit]))
        self.amplitudes = np.moveaxis(t, 0, qubit).reshape(-1)
        return self

    def cnot(self, control: int, target: int) -> "QuantumState":
        """Flip the target bit on every basis state whose control bit is 1."""
        self._check_qubit(control)
        self._check_qubit(target)
        if control == target:
            raise ValueError("CNOT control and target must differ")
        t = self._tensor().copy()
        c1t0 = _slice(self.num_qubits, {control: 1, target: 0})
        c1t1 = _slice(self.num_qubits, {control: 1, target: 1})
        t[c1t0], t[c1t1] = t[c1t1].copy(), t[c1t0].copy()
        self.amplitudes = t.reshape(-1)
        return self

    def expect_z(self, qubit: int) -> float:
        """<Z> of one qubit: probability-weighted +-1 of its basis bit."""
        self._check_qubit(qubit)
        probs = self.probabilities().reshape((2,) * self.num_qubits)
        p0 = float(probs[_slice(self.num_qubits, {qubit: 0})].sum())
        return float(np.clip(2.0 * p0 - 1.0, -1.0, 1.0))


def _slice(n: int, fixed: dict[int, int]) -> tuple:
    idx: list = [slice(None)] * n
    for axis, bit in fixed.items():
        idx[axis] = bit
    return tuple(idx)


def zero_state(n: int) -> QuantumState:
    """|0...0> on n qubits."""
    if not isinstance(n, (int, np.integer)) or not 1 <= n <= MAX_QUBITS:
        raise CapacityError(f"qubit count must be an integer in [1, {MAX_QUBITS}], got {n}")
    amps = np.zeros(2**n, dtype=complex)
    amps[0] = 1.0
    return QuantumState(int(n), amps)


def load_amplitudes(values) -> QuantumState:
    """Build a state from real amplitudes of power-of-two length and unit norm."""
    vec = np.asarray(values, dtype=float)
    if vec.ndim != 1 or vec.size < 2 or (vec.size & (vec.size - 1)) != 0:
        raise EncodingError(f"amplitude count must be a power of two >= 2, got {vec.size}")
    norm = float(np.linalg.norm(vec))
    if abs(norm - 1.0) > 1e-9:
        raise EncodingError(f"amplitudes must have unit L2 norm, got {norm!r}")
    n = int(vec.size.bit_length() - 1)
    return QuantumState(n, vec.astype(complex))


def apply_rotation(state: QuantumState, qubit: int, axis: str, theta: float) -> QuantumState:
    return state.copy().rotate(qubit, axis, theta)


def apply_cnot(state: QuantumState, control: int, target: int) -> QuantumState:
    return state.copy().cnot(control, target)


def expect_z(state: QuantumState, qubit: int) -> float:
    return state.expect_z(qubit)
