"""Dense statevector backend.

Qubit 0 is the most significant bit of the basis index, so basis state
|b_0 b_1 ... b_{n-1}> lives at index sum b_q * 2^(n-1-q). Pauli rotations are
applied via exp(-i theta/2 P) = cos(theta/2) I - i sin(theta/2) P, using the
fact that P acts as a bit-flip permutation with phases.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .cd import Circuit
from .pauli import PauliString
from .samples import SampleSet

__all__ = ["StateVector", "prepare", "apply_pauli_rotation", "run_circuit",
           "sample", "exact_expectations", "DEFAULT_QUBIT_LIMIT"]

DEFAULT_QUBIT_LIMIT = 24


@dataclass
class StateVector:
    n: int
    amplitudes: np.ndarray

    def __post_init__(self):
        if self.amplitudes.shape != (2 ** self.n,):
            raise ValueError("amplitude vector length must be 2^n")
        norm = np.linalg.norm(self.amplitudes)
        if abs(norm - 1.0) > 1e-10:
            raise ValueError(f"state not normalized: |psi| = {norm}")

    def fidelity(self, other: "StateVector") -> float:
        return float(abs(np.vdot(self.amplitudes, other.amplitudes)) ** 2)

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def dump(self, path):
        """Little-endian complex64 binary dump (debugging aid)."""
        self.amplitudes.astype("<c8").tofile(path)


def prepare(prep_angles, limit: int = DEFAULT_QUBIT_LIMIT) -> StateVector:
    """Product state with per-qubit amplitudes (cos theta/2, sin theta/2)."""
    angles = np.asarray(prep_angles, dtype=float)
    n = len(angles)
    if n > limit:
        raise ValueError(f"n={n} exceeds the statevector limit {limit}")
    amps = np.array([1.0 + 0j])
    for theta in angles:
        amps = np.kron(amps, np.array([math.cos(theta / 2), math.sin(theta / 2)],
                                      dtype=complex))
    return StateVector(n=n, amplitudes=amps)


def _pauli_action(p: PauliString):
    """Return (flip_mask, phase_vector) with P|i> = phase[i] |i ^ flip_mask>."""
    n = p.n
    idx = np.arange(2 ** n, dtype=np.int64)
    flip = 0
    phase = np.ones(2 ** n, dtype=complex)
    for q, op in p.ops:
        bit = (idx >> (n - 1 - q)) & 1
        if op == "X":
            flip |= 1 << (n - 1 - q)
        elif op == "Y":
            flip |= 1 << (n - 1 - q)
            phase *= 1j * (1 - 2 * bit)
        else:  # Z
            phase *= 1 - 2 * bit
    return flip, phase


def apply_pauli_rotation(s: StateVector, p: PauliString, theta: float) -> StateVector:
    """Apply exp(-i theta/2 P) exactly."""
    if p.n != s.n:
        raise ValueError(f"size mismatch: {p.n} vs {s.n}")
    if p.is_identity:
        raise ValueError("identity rotation is a global phase; not supported")
    flip, phase = _pauli_action(p)
    psi = s.amplitudes
    p_psi = np.empty_like(psi)
    src = phase * psi
    p_psi[np.arange(len(psi)) ^ flip] = src
    new = math.cos(theta / 2) * psi - 1j * math.sin(theta / 2) * p_psi
    return StateVector(n=s.n, amplitudes=new)


def run_circuit(c: Circuit, limit: int = DEFAULT_QUBIT_LIMIT) -> StateVector:
    s = prepare(c.prep_angles, limit=limit)
    for p, theta in c.rotations:
        s = apply_pauli_rotation(s, p, theta)
    return s


def sample(s: StateVector, n_shots: int, seed: int) -> SampleSet:
    """Measure all qubits n_shots times; inverse-CDF draws from |amp|^2."""
    if n_shots < 1:
        raise ValueError("need at least one shot")
    probs = s.probabilities()
    cdf = np.cumsum(probs)
    cdf[-1] = 1.0
    rng = np.random.default_rng(seed)
    draws = np.searchsorted(cdf, rng.random(n_shots), side="right")
    indices, counts = np.unique(draws, return_counts=True)
    entries = [
        (format(int(i), f"0{s.n}b"), int(cnt)) for i, cnt in zip(indices, counts)
    ]
    return SampleSet(n=s.n, entries=entries)


def exact_expectations(s: StateVector) -> np.ndarray:
    """Shot-free <sz_j> for every qubit."""
    probs = s.probabilities()
    idx = np.arange(2 ** s.n, dtype=np.int64)
    out = np.empty(s.n)
    for q in range(s.n):
        bit = (idx >> (s.n - 1 - q)) & 1
        out[q] = float(np.sum(probs * (1 - 2 * bit)))
    return out
