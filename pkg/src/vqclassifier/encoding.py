"""Amplitude encoding: classical feature vectors -> normalized quantum states.

The feature vector is padded up to the next power of two with a small
constant (default 0.01), then the whole padded vector is L2-normalized and
loaded as real amplitudes. Padding happens before normalization so the
result is a valid state by construction; the pad constant is absolute, so
the encoding is deliberately *not* invariant to input scaling.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import isfinite

import numpy as np

from .errors import DegenerateInputError, ShapeError
from .statevector import QuantumState, load_amplitudes

DEFAULT_PAD_VALUE = 0.01

# Order of operations, fixed: the raw feature vector is padded first and the
# whole padded vector normalized after, which guarantees a valid state for
# any nonzero input. The alternative (normalize, then pad, then renormalize)
# can be composed from the public pieces for comparison experiments.
PAD_THEN_NORMALIZE = True


def _next_power_of_two(n: int) -> int:
    p = 1
    while p < n:
        p *= 2
    return p


@dataclass(frozen=True)
class EncodingConfig:
    """Fixes the feature dimension and the constant used to pad it out."""

    feature_dim: int
    pad_value: float = DEFAULT_PAD_VALUE

    def __post_init__(self):
        if self.feature_dim < 2:
            raise ValueError(f"feature_dim must be >= 2, got {self.feature_dim}")
        if not isfinite(self.pad_value):
            raise ValueError(f"pad_value must be finite, got {self.pad_value}")

    @property
    def target_dim(self) -> int:
        """Smallest power of two >= feature_dim."""
        return _next_power_of_two(self.feature_dim)

    @property
    def num_qubits(self) -> int:
        return self.target_dim.bit_length() - 1


def pad_features(x, cfg: EncodingConfig) -> np.ndarray:
    """Extend x to cfg.target_dim entries using cfg.pad_value; identity if already there."""
    vec = np.asarray(x, dtype=float)
    if vec.ndim != 1 or vec.size != cfg.feature_dim:
        raise ShapeError(f"expected {cfg.feature_dim} features, got shape {vec.shape}")
    pad = cfg.target_dim - cfg.feature_dim
    if pad == 0:
        return vec.copy()
    return np.concatenate([vec, np.full(pad, cfg.pad_value)])


def normalize(x) -> np.ndarray:
    """x / ||x||_2, rejecting (near-)zero vectors instead of fabricating a state."""
    vec = np.asarray(x, dtype=float)
    norm = float(np.linalg.norm(vec))
    if norm <= 1e-12:
        raise DegenerateInputError(f"cannot normalize vector with L2 norm {norm!r}")
    return vec / norm


def amplitude_encode(x, cfg: EncodingConfig) -> QuantumState:
    """pad -> normalize -> load as the real amplitudes of a ceil(log2 N)-qubit state."""
    return load_amplitudes(normalize(pad_features(x, cfg)))
