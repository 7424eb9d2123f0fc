"""Analytic circuit gradients via the parameter-shift rule.

For single-parameter rotation gates (generator eigenvalues +-1/2) the
derivative of every circuit expectation is exact at shift pi/2:

    d<Z_k>/d theta_j = ( f_k(theta_j + pi/2) - f_k(theta_j - pi/2) ) / 2

Finite differences are provided purely as an independent verification
oracle; production training uses the shift rule.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import ansatz as _ansatz
from .ansatz import AnsatzConfig, AnsatzParams
from .encoding import EncodingConfig

SHIFT = np.pi / 2.0


@dataclass
class CircuitJacobian:
    """entries[j, k] = d<Z_k> / d theta_j, parameters flattened row-major (layer, qubit)."""

    entries: np.ndarray

    def __post_init__(self):
        self.entries = np.asarray(self.entries, dtype=float)
        if not np.all(np.isfinite(self.entries)):
            raise ValueError("Jacobian entries must be finite")


def parameter_shift_jacobian(
    x,
    params: AnsatzParams,
    cfg: AnsatzConfig,
    enc_cfg: EncodingConfig,
    shift: float = SHIFT,
) -> CircuitJacobian:
    """Exactly 2*L*n forward evaluations, one +-shift pair per parameter.

    ``shift`` exists for diagnostics (the rule is only exact at pi/2).
    """
    flat = params.angles.reshape(-1)
    rows = []
    for j in range(flat.size):
        shifted = flat.copy()
        shifted[j] = flat[j] + shift
        f_plus = _ansatz.circuit_forward(x, AnsatzParams(shifted.reshape(params.angles.shape)), cfg, enc_cfg)
        shifted[j] = flat[j] - shift
        f_minus = _ansatz.circuit_forward(x, AnsatzParams(shifted.reshape(params.angles.shape)), cfg, enc_cfg)
        rows.append((f_plus - f_minus) / 2.0)
    return CircuitJacobian(np.array(rows))


def finite_diff_jacobian(
    x,
    params: AnsatzParams,
    cfg: AnsatzConfig,
    enc_cfg: EncodingConfig,
    epsilon: float = 1e-5,
) -> CircuitJacobian:
    """Central-difference oracle: (f(theta+eps) - f(theta-eps)) / (2 eps) per parameter."""
    if not 1e-8 <= epsilon <= 1e-2:
        raise ValueError(f"epsilon must lie in [1e-8, 1e-2], got {epsilon}")
    flat = params.angles.reshape(-1)
    rows = []
    for j in range(flat.size):
        shifted = flat.copy()
        shifted[j] = flat[j] + epsilon
        f_plus = _ansatz.circuit_forward(x, AnsatzParams(shifted.reshape(params.angles.shape)), cfg, enc_cfg)
        shifted[j] = flat[j] - epsilon
        f_minus = _ansatz.circuit_forward(x, AnsatzParams(shifted.reshape(params.angles.shape)), cfg, enc_cfg)
        rows.append((f_plus - f_minus) / (2.0 * epsilon))
    return CircuitJacobian(np.array(rows))
