"""Measurement records, CVaR estimators and quality metrics."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .hubo import HuboProblem, assignment_from_bits, energy

__all__ = ["SampleSet", "cvar_energy", "cvar_expectations", "metrics",
           "UndefinedMetricError"]


class UndefinedMetricError(ValueError):
    """Metrics divide by the reference energy, which must be nonzero."""


@dataclass
class SampleSet:
    """Measured bitstrings with counts; energies attach lazily per problem."""

    n: int
    entries: list  # [(bitstring, count)]
    energies: np.ndarray | None = None  # per-entry cost, parallel to entries

    def __post_init__(self):
        for bits, count in self.entries:
            if len(bits) != self.n:
                raise ValueError(f"bitstring {bits!r} has wrong length")
            if count < 1:
                raise ValueError("counts must be positive")

    @property
    def n_shots(self):
        return sum(c for _, c in self.entries)

    def with_energies(self, p: HuboProblem) -> "SampleSet":
        e = np.array([energy(p, assignment_from_bits(bits)) for bits, _ in self.entries])
        return SampleSet(n=self.n, entries=list(self.entries), energies=e)

    def require_energies(self):
        if self.energies is None:
            raise ValueError("energies not attached; call with_energies first")
        return self.energies

    def mean_energy(self) -> float:
        e = self.require_energies()
        counts = np.array([c for _, c in self.entries])
        return float(np.dot(e, counts) / counts.sum())

    def min_energy(self) -> float:
        return float(np.min(self.require_energies()))

    def best_bitstring(self) -> str:
        e = self.require_energies()
        order = sorted(range(len(self.entries)), key=lambda i: (e[i], self.entries[i][0]))
        return self.entries[order[0]][0]

    def to_json_list(self):
        return [[bits, count] for bits, count in self.entries]

    @classmethod
    def from_json_list(cls, n, data):
        return cls(n=n, entries=[(str(b), int(c)) for b, c in data])


def _sorted_shot_view(s: SampleSet):
    """Entries sorted by (energy, bitstring) with per-entry counts."""
    e = s.require_energies()
    order = sorted(range(len(s.entries)), key=lambda i: (e[i], s.entries[i][0]))
    return [(s.entries[i][0], s.entries[i][1], float(e[i])) for i in order]


def _cvar_count(s: SampleSet, alpha: float) -> int:
    if not 0.0 < alpha <= 1.0:
        raise ValueError(f"alpha must be in (0, 1], got {alpha}")
    if not s.entries:
        raise ValueError("empty sample set")
    return int(np.ceil(alpha * s.n_shots))

def cvar_energy(s: SampleSet, alpha: float) -> float:
    """Mean of the ceil(alpha * n_shots) lowest-energy shots."""
    m = _cvar_count(s, alpha)
    total, taken = 0.0, 0
    for _, count, e in _sorted_shot_view(s):
        take = min(count, m - taken)
        total += take * e
        taken += take
        if taken == m:
            break
    return total / m


def cvar_expectations(s: SampleSet, alpha: float) -> np.ndarray:
    """Per-qubit <sz_j> over the lowest-energy fraction of the shots.

    Ties between equal-energy shots are broken by bitstring lexicographic
    order, making the estimator deterministic.
    """
    m = _cvar_count(s, alpha)
    acc = np.zeros(s.n)
    taken = 0
    for bits, count, _ in _sorted_shot_view(s):
        take = min(count, m - taken)
        acc += take * assignment_from_bits(bits)
        taken += take
        if taken == m:
            break
    return acc / m


def metrics(s: SampleSet, e0: float):
    """(approximation ratio, distance to solution) against reference energy e0."""
    if e0 == 0.0:
        raise UndefinedMetricError("reference energy is zero")
    ar = s.mean_energy() / e0
    ds = 1.0 - s.min_energy() / e0
    return ar, ds
