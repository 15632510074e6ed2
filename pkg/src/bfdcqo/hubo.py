"""Problem representation for 3-local Ising cost functions.

Conventions shared by the whole package:
  * bit 0 <-> spin +1, bit 1 <-> spin -1
  * index tuples are stored strictly increasing (i < j < k)
  * zero coefficients are never stored
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "HuboProblem",
    "Clause",
    "CnfInstance",
    "energy",
    "assignment_from_bits",
    "bits_from_assignment",
    "gen_nn_spin_glass",
    "gen_max3sat",
    "gen_max3sat_nn",
    "cnf_to_hubo",
    "satisfied_weight",
]


class DimensionError(ValueError):
    """Assignment length does not match the problem size."""


@dataclass(frozen=True)
class HuboProblem:
    """Cost function  offset + sum h_i s_i + sum J_ij s_i s_j + sum K_ijk s_i s_j s_k."""

    n: int
    linear: dict = field(default_factory=dict)
    quadratic: dict = field(default_factory=dict)
    cubic: dict = field(default_factory=dict)
    offset: float = 0.0

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"need at least one spin, got n={self.n}")
        for i in self.linear:
            if not 0 <= i < self.n:
                raise ValueError(f"linear index {i} out of range [0, {self.n})")
        for t in self.quadratic:
            if len(t) != 2 or not (0 <= t[0] < t[1] < self.n):
                raise ValueError(f"quadratic index tuple {t} not strictly increasing in range")
        for t in self.cubic:
            if len(t) != 3 or not (0 <= t[0] < t[1] < t[2] < self.n):
                raise ValueError(f"cubic index tuple {t} not strictly increasing in range")
        for coeffs in (self.linear, self.quadratic, self.cubic):
            for v in coeffs.values():
                if v == 0.0:
                    raise ValueError("zero coefficients must not be stored")

    @classmethod
    def from_terms(cls, n, terms, offset=0.0):
        """Accumulate (index-tuple, coefficient) pairs into canonical sparse form.

        Tuples may arrive unsorted; repeated tuples are summed. The empty
        tuple adds to the constant offset.
        """
        linear, quadratic, cubic = {}, {}, {}
        for idx, coeff in terms:
            idx = tuple(sorted(idx))
            if len(set(idx)) != len(idx):
                raise ValueError(f"repeated index in term {idx}")
            if len(idx) == 0:
                offset += coeff
            elif len(idx) == 1:
                linear[idx[0]] = linear.get(idx[0], 0.0) + coeff
            elif len(idx) == 2:
                quadratic[idx] = quadratic.get(idx, 0.0) + coeff
            elif len(idx) == 3:
                cubic[idx] = cubic.get(idx, 0.0) + coeff
            else:
                raise ValueError(f"terms beyond 3-local unsupported: {idx}")
        return cls(
            n=n,
            linear={i: v for i, v in linear.items() if v != 0.0},
            quadratic={t: v for t, v in quadratic.items() if v != 0.0},
            cubic={t: v for t, v in cubic.items() if v != 0.0},
            offset=offset,
        )

    @property
    def num_terms(self):
        return len(self.linear) + len(self.quadratic) + len(self.cubic)

    def coupling_range(self):
        """Largest index spread (max - min + 1) over stored couplings; 1 for linear-only."""
        spread = 1 if (self.linear or self.offset) else 0
        for t in self.quadratic:
            spread = max(spread, t[1] - t[0] + 1)
        for t in self.cubic:
            spread = max(spread, t[2] - t[0] + 1)
        return spread

    def __add__(self, other):
        if not isinstance(other, HuboProblem):
            return NotImplemented
        if other.n != self.n:
            raise DimensionError(f"size mismatch: {self.n} vs {other.n}")
        terms = [((i,), v) for i, v in self.linear.items()]
        terms += [(t, v) for t, v in self.quadratic.items()]
        terms += [(t, v) for t, v in self.cubic.items()]
        terms += [((i,), v) for i, v in other.linear.items()]
        terms += [(t, v) for t, v in other.quadratic.items()]
        terms += [(t, v) for t, v in other.cubic.items()]
        return HuboProblem.from_terms(self.n, terms, self.offset + other.offset)

    # --- serialization ---

    def to_json_dict(self):
        return {
            "n": self.n,
            "offset": self.offset,
            "linear": [[i, v] for i, v in sorted(self.linear.items())],
            "quadratic": [[i, j, v] for (i, j), v in sorted(self.quadratic.items())],
            "cubic": [[i, j, k, v] for (i, j, k), v in sorted(self.cubic.items())],
        }

    @classmethod
    def from_json_dict(cls, d):
        return cls(
            n=int(d["n"]),
            linear={int(i): float(v) for i, v in d.get("linear", [])},
            quadratic={(int(i), int(j)): float(v) for i, j, v in d.get("quadratic", [])},
            cubic={(int(i), int(j), int(k)): float(v) for i, j, k, v in d.get("cubic", [])},
            offset=float(d.get("offset", 0.0)),
        )

    def save(self, path):
        with open(path, "w") as f:
            json.dump(self.to_json_dict(), f, indent=1)
            f.write("\n")

    @classmethod
    def load(cls, path):
        with open(path) as f:
            return cls.from_json_dict(json.load(f))


def energy(p: HuboProblem, spins) -> float:
    """Evaluate the cost of a +-1 assignment."""
    s = np.asarray(spins)
    if s.shape != (p.n,):
        raise DimensionError(f"assignment length {s.shape} does not match n={p.n}")
    e = p.offset
    for i, h in p.linear.items():
        e += h * s[i]
    for (i, j), J in p.quadratic.items():
        e += J * s[i] * s[j]
    for (i, j, k), K in p.cubic.items():
        e += K * s[i] * s[j] * s[k]
    return float(e)


def assignment_from_bits(bits: str) -> np.ndarray:
    """Bitstring to spins: '0' -> +1, '1' -> -1. Qubit 0 is the leftmost character."""
    return np.array([1 - 2 * int(b) for b in bits], dtype=np.int8)


def bits_from_assignment(spins) -> str:
    return "".join("0" if s > 0 else "1" for s in spins)


# --- instance generators ---
#
# All generators draw from numpy's default PCG64 generator seeded with the
# given integer. Stream order is part of the reproducibility contract and is
# documented per generator.


def gen_nn_spin_glass(n: int, seed: int) -> HuboProblem:
    """Nearest-neighbour chain with 3-local terms and N(0,1) coefficients.

    Stream order: h[0..n-1], then J[(i,i+1)] for i ascending, then
    K[(i,i+1,i+2)] for i ascending.
    """
    if n < 3:
        raise ValueError(f"nearest-neighbour 3-local chain needs n >= 3, got {n}")
    rng = np.random.default_rng(seed)
    h = rng.standard_normal(n)
    J = rng.standard_normal(n - 1)
    K = rng.standard_normal(n - 2)
    return HuboProblem(
        n=n,
        linear={i: float(h[i]) for i in range(n) if h[i] != 0.0},
        quadratic={(i, i + 1): float(J[i]) for i in range(n - 1) if J[i] != 0.0},
        cubic={(i, i + 1, i + 2): float(K[i]) for i in range(n - 2) if K[i] != 0.0},
    )


@dataclass(frozen=True)
class Clause:
    """Three distinct variables with per-literal negation flags and a positive weight."""

    vars: tuple
    negated: tuple
    weight: float = 1.0

    def __post_init__(self):
        if len(self.vars) != 3 or len(set(self.vars)) != 3:
            raise ValueError(f"clause needs 3 distinct variables, got {self.vars}")
        if len(self.negated) != 3:
            raise ValueError("need one negation flag per literal")
        if not self.weight > 0:
            raise ValueError(f"clause weight must be positive, got {self.weight}")

    def satisfied(self, bits) -> bool:
        # literal true iff bit equals the negation flag (u true <-> x=0)
        return any(int(bits[v]) == int(neg) for v, neg in zip(self.vars, self.negated))


@dataclass(frozen=True)
class CnfInstance:
    n_vars: int
    clauses: tuple

    def __post_init__(self):
        for c in self.clauses:
            if max(c.vars) >= self.n_vars:
                raise ValueError(f"clause variable {max(c.vars)} out of range")

    @property
    def total_weight(self):
        return sum(c.weight for c in self.clauses)

    def to_wcnf(self) -> str:
        """Weighted DIMACS-like text: header, then 'weight lit lit lit 0' per clause."""
        lines = [f"w-cnf {self.n_vars} {len(self.clauses)}"]
        for c in self.clauses:
            lits = " ".join(
                str(-(v + 1) if neg else (v + 1)) for v, neg in zip(c.vars, c.negated)
            )
            lines.append(f"{c.weight!r} {lits} 0")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_wcnf(cls, text: str) -> "CnfInstance":
        lines = [ln for ln in text.splitlines() if ln.strip()]
        head = lines[0].split()
        if head[0] != "w-cnf":
            raise ValueError("expected 'w-cnf' header")
        n_vars = int(head[1])
        clauses = []
        for ln in lines[1:]:
            parts = ln.split()
            weight = float(parts[0])
            lits = [int(x) for x in parts[1:]]
            if lits[-1] != 0:
                raise ValueError(f"clause line not 0-terminated: {ln!r}")
            lits = lits[:-1]
            clauses.append(
                Clause(
                    vars=tuple(abs(l) - 1 for l in lits),
                    negated=tuple(l < 0 for l in lits),
                    weight=weight,
                )
            )
        return cls(n_vars=n_vars, clauses=tuple(clauses))

    def save(self, path):
        with open(path, "w") as f:
            f.write(self.to_wcnf())

    @classmethod
    def load(cls, path):
        with open(path) as f:
            return cls.from_wcnf(f.read())


def gen_max3sat(n_vars: int, density: float, weighted: bool, seed: int) -> CnfInstance:
    """Random MAX 3-SAT with ceil(n_vars * density) clauses.

    Per clause the stream order is: 3 distinct variables (choice without
    replacement), 3 negation draws, then the weight (uniform in (0,1] when
    weighted). Duplicate clauses are allowed; their weights simply add when
    the instance is mapped to a Hamiltonian.
    """
    if n_vars < 3:
        raise ValueError(f"need n_vars >= 3, got {n_vars}")
    if density <= 0:
        raise ValueError(f"density must be positive, got {density}")
    rng = np.random.default_rng(seed)
    m = math.ceil(n_vars * density)
    clauses = []
    for _ in range(m):
        vars_ = tuple(int(v) for v in rng.choice(n_vars, size=3, replace=False))
        negated = tuple(bool(b) for b in rng.random(3) < 0.5)
        weight = float(1.0 - rng.random()) if weighted else 1.0
        clauses.append(Clause(vars=vars_, negated=negated, weight=weight))
    return CnfInstance(n_vars=n_vars, clauses=tuple(clauses))


def gen_max3sat_nn(n_vars: int, weighted: bool, seed: int) -> CnfInstance:
    """Chain-structured MAX 3-SAT: one clause per consecutive triple (i, i+1, i+2).

    Stream order per clause: 3 negation draws, then the weight when weighted.
    """
    if n_vars < 3:
        raise ValueError(f"need n_vars >= 3, got {n_vars}")
    rng = np.random.default_rng(seed)
    clauses = []
    for i in range(n_vars - 2):
        negated = tuple(bool(b) for b in rng.random(3) < 0.5)
        weight = float(1.0 - rng.random()) if weighted else 1.0
        clauses.append(Clause(vars=(i, i + 1, i + 2), negated=negated, weight=weight))
    return CnfInstance(n_vars=n_vars, clauses=tuple(clauses))


def satisfied_weight(c: CnfInstance, bits) -> float:
    """Total weight of clauses satisfied by a bitstring (direct evaluation)."""
    return sum(cl.weight for cl in c.clauses if cl.satisfied(bits))


def cnf_to_hubo(c: CnfInstance) -> HuboProblem:
    """Map a weighted CNF onto spins so that minimization maximizes satisfied weight.

    Each clause contributes -w * [clause satisfied], written as
    -w + (w/8) * prod_i (1 + (-1)^(1-c_i) s_i) over its three literals
    (c_i = 1 when the literal is negated). For every assignment the resulting
    energy equals minus the satisfied weight.
    """
    terms = []
    offset = 0.0
    for cl in c.clauses:
        offset -= cl.weight
        # unsatisfied-clause indicator expands into 8 spin monomials
        signs = [(-1.0 if not neg else 1.0) for neg in cl.negated]
        w8 = cl.weight / 8.0
        for mask in range(8):
            idx = tuple(cl.vars[b] for b in range(3) if mask >> b & 1)
            coeff = w8
            for b in range(3):
                if mask >> b & 1:
                    coeff *= signs[b]
            terms.append((idx, coeff))
    return HuboProblem.from_terms(c.n_vars, terms, offset)
