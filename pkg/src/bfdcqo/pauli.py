"""Sparse Pauli-string algebra: products, sums, commutators, norms."""
from __future__ import annotations

from dataclasses import dataclass

__all__ = ["PauliString", "PauliSum", "pauli_mul", "commutator"]

PRUNE_TOL = 1e-14

# single-qubit products: (a, b) -> (phase, result); identity handled separately
_MUL = {
    ("X", "X"): (1, None),
    ("Y", "Y"): (1, None),
    ("Z", "Z"): (1, None),
    ("X", "Y"): (1j, "Z"),
    ("Y", "X"): (-1j, "Z"),
    ("Y", "Z"): (1j, "X"),
    ("Z", "Y"): (-1j, "X"),
    ("Z", "X"): (1j, "Y"),
    ("X", "Z"): (-1j, "Y"),
}


@dataclass(frozen=True)
class PauliString:
    """Tensor product of single-qubit Paulis, identity on unlisted qubits.

    ops: tuple of (qubit, 'X'|'Y'|'Z') sorted by qubit index.
    """

    n: int
    ops: tuple = ()

    def __post_init__(self):
        qubits = [q for q, _ in self.ops]
        if qubits != sorted(set(qubits)):
            raise ValueError(f"ops must be sorted by unique qubit index: {self.ops}")
        if qubits and (qubits[0] < 0 or qubits[-1] >= self.n):
            raise ValueError(f"qubit index out of range [0, {self.n})")
        for _, op in self.ops:
            if op not in ("X", "Y", "Z"):
                raise ValueError(f"unknown Pauli label {op!r}")

    @classmethod
    def from_map(cls, n, opmap):
        return cls(n, tuple(sorted(opmap.items())))

    @property
    def is_identity(self):
        return not self.ops

    @property
    def support(self):
        return tuple(q for q, _ in self.ops)

    @property
    def weight(self):
        return len(self.ops)

    def op_on(self, q):
        for qq, op in self.ops:
            if qq == q:
                return op
        return "I"

    def commutes_with(self, other: "PauliString") -> bool:
        a, b = dict(self.ops), dict(other.ops)
        anticommuting = sum(
            1 for q in set(a) & set(b) if a[q] != b[q]
        )
        return anticommuting % 2 == 0

    def __str__(self):
        if not self.ops:
            return "I"
        return "*".join(f"{op}{q}" for q, op in self.ops)


def pauli_mul(a: PauliString, b: PauliString):
    """Product a*b as (phase, string) with phase in {1, -1, i, -i}."""
    if a.n != b.n:
        raise ValueError(f"size mismatch: {a.n} vs {b.n}")
    da, db = dict(a.ops), dict(b.ops)
    phase = 1 + 0j
    out = {}
    for q in sorted(set(da) | set(db)):
        pa, pb = da.get(q), db.get(q)
        if pa is None:
            out[q] = pb
        elif pb is None:
            out[q] = pa
        else:
            ph, res = _MUL[(pa, pb)]
            phase *= ph
            if res is not None:
                out[q] = res
    return phase, PauliString.from_map(a.n, out)


class PauliSum:
    """Weighted sum of Pauli strings with complex coefficients."""

    __slots__ = ("n", "terms")

    def __init__(self, n, terms=None):
        self.n = n
        self.terms = {}
        if terms:
            for p, c in dict(terms).items():
                if p.n != n:
                    raise ValueError("string size mismatch")
                if abs(c) > PRUNE_TOL:
                    self.terms[p] = complex(c)

    @classmethod
    def zero(cls, n):
        return cls(n)

    def add_term(self, p: PauliString, coeff):
        c = self.terms.get(p, 0j) + coeff
        if abs(c) > PRUNE_TOL:
            self.terms[p] = c
        else:
            self.terms.pop(p, None)

    def __len__(self):
        return len(self.terms)

    def __add__(self, other):
        if other.n != self.n:
            raise ValueError("size mismatch")
        out = PauliSum(self.n, self.terms)
        for p, c in other.terms.items():
            out.add_term(p, c)
        return out

    def __sub__(self, other):
        return self + other.scaled(-1)

    def scaled(self, factor):
        return PauliSum(self.n, {p: c * factor for p, c in self.terms.items()})

    def hs_norm_sq(self) -> float:
        """Normalized Hilbert-Schmidt norm Tr[A^dag A]/2^n = sum |coeff|^2."""
        return float(sum(abs(c) ** 2 for c in self.terms.values()))

    def is_anti_hermitian(self, tol=1e-12):
        return all(abs(c.real) <= tol for c in self.terms.values())

    def __str__(self):
        if not self.terms:
            return "0"
        return " + ".join(f"({c:.4g})*{p}" for p, c in sorted(
            self.terms.items(), key=lambda t: t[0].ops))


def commutator(a: PauliSum, b: PauliSum) -> PauliSum:
    """[a, b] = ab - ba; anticommuting string pairs contribute 2*ab."""
    if a.n != b.n:
        raise ValueError(f"size mismatch: {a.n} vs {b.n}")
    out = PauliSum.zero(a.n)
    for pa, ca in a.terms.items():
        for pb, cb in b.terms.items():
            if pa.commutes_with(pb):
                continue
            phase, ps = pauli_mul(pa, pb)
            out.add_term(ps, 2.0 * ca * cb * phase)
    return out
