"""Jitted inner loops for the circuit hot path.

These kernels exist purely for speed: parameter-shift training re-simulates
the full circuit 2*L*n times per example, and per-gate numpy dispatch
dominates at 10-20 qubits' worth of amplitudes. Semantics are pinned to the
statevector module (same gate definitions, same MSB-first bit convention)
and the test suite cross-checks the two paths against an explicit matrix
oracle.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit

AXIS_CODES = {"X": 0, "Y": 1, "Z": 2}


@njit(cache=True)
def _cnot_inplace(amps: np.ndarray, control: int, target: int, n: int) -> None:
    cbit = 1 << (n - 1 - control)
    tbit = 1 << (n - 1 - target)
    for i in range(amps.shape[0]):
        if (i & cbit) != 0 and (i & tbit) == 0:
            j = i | tbit
            tmp = amps[i]
            amps[i] = amps[j]
            amps[j] = tmp


@njit(cache=True)
def _rotate_inplace(amps: np.ndarray, qubit: int, axis_code: int, theta: float, n: int) -> None:
    c = math.cos(theta / 2.0)
    s = math.sin(theta / 2.0)
    stride = 1 << (n - 1 - qubit)
    step = stride << 1
    for base in range(0, amps.shape[0], step):
        for off in range(base, base + stride):
            i1 = off + stride
            a0 = amps[off]
            a1 = amps[i1]
            if axis_code == 0:
                amps[off] = c * a0 - 1j * (s * a1)
                amps[i1] = -1j * (s * a0) + c * a1
            elif axis_code == 1:
                amps[off] = c * a0 - s * a1
                amps[i1] = s * a0 + c * a1
            else:
                amps[off] = (c - 1j * s) * a0
                amps[i1] = (c + 1j * s) * a1


@njit(cache=True)
def evolve_layers(amps: np.ndarray, angles: np.ndarray, axis_code: int) -> None:
    """All entangling layers in place: rotations per qubit, then the CNOT ring."""
    num_layers, n = angles.shape
    for layer in range(num_layers):
        for q in range(n):
            _rotate_inplace(amps, q, axis_code, angles[layer, q], n)
        if n == 2:
            _cnot_inplace(amps, 0, 1, n)
        elif n > 2:
            for q in range(n):
                _cnot_inplace(amps, q, (q + 1) % n, n)


@njit(cache=True)
def z_expectations(amps: np.ndarray, n: int) -> np.ndarray:
    out = np.zeros(n)
    for i in range(amps.shape[0]):
        p = amps[i].real * amps[i].real + amps[i].imag * amps[i].imag
        for q in range(n):
            if (i >> (n - 1 - q)) & 1:
                out[q] -= p
            else:
                out[q] += p
    for q in range(n):
        if out[q] > 1.0:
            out[q] = 1.0
        elif out[q] < -1.0:
            out[q] = -1.0
    return out
