"""Trainable circuit: stacked entangling layers over an amplitude-encoded state.

One layer = a single-parameter rotation on every qubit (ascending order),
followed by a ring of CNOTs (0->1), (1->2), ..., (n-1 -> 0). Two qubits get
a single CNOT (a 2-cycle would partially cancel itself); one qubit gets
none. The circuit ends in per-qubit Pauli-Z expectations.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .encoding import EncodingConfig, amplitude_encode
from .errors import ShapeError
from .statevector import AXES, QuantumState

DEFAULT_AXIS = "X"


@dataclass(frozen=True)
class AnsatzConfig:
    num_qubits: int
    num_layers: int
    rotation_axis: str = DEFAULT_AXIS

    def __post_init__(self):
        if self.num_qubits < 1:
            raise ValueError(f"num_qubits must be >= 1, got {self.num_qubits}")
        if self.num_layers < 1:
            raise ValueError(f"num_layers must be >= 1, got {self.num_layers}")
        if self.rotation_axis not in AXES:
            raise ValueError(f"rotation_axis must be one of {AXES}, got {self.rotation_axis!r}")

    @property
    def num_params(self) -> int:
        return self.num_layers * self.num_qubits


@dataclass
class AnsatzParams:
    """L x n matrix of rotation angles, row = layer."""

    angles: np.ndarray

    def __post_init__(self):
        self.angles = np.asarray(self.angles, dtype=float)
        if self.angles.ndim != 2:
            raise ShapeError(f"angles must be a 2-D matrix, got shape {self.angles.shape}")
        if not np.all(np.isfinite(self.angles)):
            raise ValueError("angles must all be finite")

    def copy(self) -> "AnsatzParams":
        return AnsatzParams(self.angles.copy())

    def matches(self, cfg: AnsatzConfig) -> bool:
        return self.angles.shape == (cfg.num_layers, cfg.num_qubits)


def init_params(cfg: AnsatzConfig, seed: int) -> AnsatzParams:
    """Seeded i.i.d. uniform angles over [0, 2*pi)."""
    rng = np.random.default_rng(seed)
    return AnsatzParams(rng.uniform(0.0, 2.0 * np.pi, size=(cfg.num_layers, cfg.num_qubits)))


def apply_entangling_layer(state: QuantumState, angles_row, axis: str = DEFAULT_AXIS) -> QuantumState:
    """Pure single-layer application: rotations then the CNOT ring."""
    return entangling_layer_inplace(state.copy(), angles_row, axis)


def entangling_layer_inplace(state: QuantumState, angles_row, axis: str) -> QuantumState:
    row = np.asarray(angles_row, dtype=float)
    n = state.num_qubits
    if row.shape != (n,):
        raise ShapeError(f"expected {n} angles for {n} qubits, got shape {row.shape}")
    for q in range(n):
        state.rotate(q, axis, row[q])
    if n == 2:
        state.cnot(0, 1)
    elif n > 2:
        for q in range(n):
            state.cnot(q, (q + 1) % n)
    return state


def circuit_forward(x, params: AnsatzParams, cfg: AnsatzConfig, enc_cfg: EncodingConfig) -> np.ndarray:
    """Encode x, run all layers, read out <Z> per qubit. Deterministic, outputs in [-1, 1]."""
    if not params.matches(cfg):
        raise ShapeError(
            f"params shape {params.angles.shape} does not match "
            f"(layers={cfg.num_layers}, qubits={cfg.num_qubits})"
        )
    if enc_cfg.num_qubits != cfg.num_qubits:
        raise ShapeError(
            f"encoding yields {enc_cfg.num_qubits} qubits but ansatz expects {cfg.num_qubits}"
        )
    state = amplitude_encode(x, enc_cfg)
    amps = np.ascontiguousarray(state.amplitudes)
    _kernels.evolve_layers(amps, params.angles, _kernels.AXIS_CODES[cfg.rotation_axis])
    return _kernels.z_expectations(amps, cfg.num_qubits)
