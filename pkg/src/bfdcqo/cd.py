"""Counterdiabatic drive construction.

Builds the first-order commutator operator for a 3-local cost Hamiltonian,
its closed-form Hilbert-Schmidt norms (used for the drive coefficient), the
evolution schedule, and the Trotterized rotation circuit with a gate cutoff.

The Hilbert-Schmidt norm convention is Tr[A^dag A]/2^n, i.e. the sum of
squared string coefficients; the drive coefficient is a ratio of two such
norms, so the normalization cancels.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .hubo import CnfInstance, HuboProblem, cnf_to_hubo
from .pauli import PauliString, PauliSum, commutator

__all__ = [
    "DriveSpec",
    "BiasState",
    "Circuit",
    "DegenerateDriveError",
    "schedule",
    "build_hf_sum",
    "build_hi_sum",
    "build_o1_symbolic",
    "sat_o1_direct",
    "gamma1",
    "gamma2",
    "alpha1",
    "prepare_angles",
    "build_cd_circuit",
    "build_cd_circuit_sat",
]

GAMMA2_TOL = 1e-30


class DegenerateDriveError(ValueError):
    """The second commutator norm vanished; the drive coefficient is undefined."""


@dataclass(frozen=True)
class DriveSpec:
    """Evolution window, Trotter resolution, gate cutoff and transverse field."""

    total_time: float = 1.0
    n_trot: int = 3
    theta_cutoff: float = 0.0
    hx: np.ndarray | None = None  # None -> -1 on every qubit
    evaluation_points: str = "step_end"  # or "step_midpoint"

    def __post_init__(self):
        if self.total_time <= 0:
            raise ValueError(f"total_time must be positive, got {self.total_time}")
        if self.n_trot < 1:
            raise ValueError(f"n_trot must be >= 1, got {self.n_trot}")
        if self.theta_cutoff < 0:
            raise ValueError(f"theta_cutoff must be >= 0, got {self.theta_cutoff}")
        if self.evaluation_points not in ("step_end", "step_midpoint"):
            raise ValueError(f"unknown evaluation_points {self.evaluation_points!r}")

    def hx_vector(self, n: int) -> np.ndarray:
        if self.hx is None:
            return np.full(n, -1.0)
        hx = np.asarray(self.hx, dtype=float)
        if hx.shape != (n,):
            raise ValueError(f"hx length {hx.shape} does not match n={n}")
        if np.any(hx == 0.0):
            raise ValueError("transverse field must be nonzero on every qubit")
        return hx


@dataclass(frozen=True)
class BiasState:
    """Longitudinal bias fields h^b_j added to the mixer Hamiltonian."""

    hb: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "hb", np.asarray(self.hb, dtype=float))
        if not np.all(np.isfinite(self.hb)):
            raise ValueError("bias fields must be finite")

    @classmethod
    def zero(cls, n):
        return cls(np.zeros(n))


@dataclass(frozen=True)
class Circuit:
    """Ry preparation layer followed by Pauli rotations exp(-i theta/2 P)."""

    n: int
    prep_angles: np.ndarray
    rotations: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "prep_angles", np.asarray(self.prep_angles, dtype=float))
        if self.prep_angles.shape != (self.n,):
            raise ValueError("one preparation angle per qubit required")
        for p, theta in self.rotations:
            if p.is_identity:
                raise ValueError("identity rotations are not allowed")
            if not math.isfinite(theta):
                raise ValueError("rotation angle must be finite")

    def rotation_count_by_locality(self) -> dict:
        counts = {}
        for p, _ in self.rotations:
            counts[p.weight] = counts.get(p.weight, 0) + 1
        return counts

    def to_json_dict(self):
        return {
            "n": self.n,
            "prep_angles": list(map(float, self.prep_angles)),
            "rotations": [
                {"paulis": [[q, op] for q, op in p.ops], "theta": float(theta)}
                for p, theta in self.rotations
            ],
        }

    @classmethod
    def from_json_dict(cls, d):
        rotations = tuple(
            (PauliString(int(d["n"]), tuple((int(q), str(op)) for q, op in r["paulis"])),
             float(r["theta"]))
            for r in d["rotations"]
        )
        return cls(n=int(d["n"]), prep_angles=np.array(d["prep_angles"]), rotations=rotations)

    def save(self, path):
        with open(path, "w") as f:
            json.dump(self.to_json_dict(), f)
            f.write("\n")


def schedule(t: float, total_time: float):
    """Evolution schedule lambda(t) = sin^2(pi/2 * sin^2(pi t / 2T)) and its derivative."""
    if not 0.0 <= t <= total_time:
        raise ValueError(f"t={t} outside [0, {total_time}]")
    u = math.sin(math.pi * t / (2 * total_time)) ** 2
    lam = math.sin(math.pi * u / 2) ** 2
    lam_dot = (math.pi ** 2 / (4 * total_time)) * math.sin(math.pi * u) \
        * math.sin(math.pi * t / total_time)
    return lam, lam_dot


# --- symbolic Hamiltonians ---


def build_hf_sum(p: HuboProblem) -> PauliSum:
    """Cost Hamiltonian as a sum of Z strings (constant offset omitted)."""
    out = PauliSum.zero(p.n)
    for i, h in p.linear.items():
        out.add_term(PauliString.from_map(p.n, {i: "Z"}), h)
    for (i, j), J in p.quadratic.items():
        out.add_term(PauliString.from_map(p.n, {i: "Z", j: "Z"}), J)
    for (i, j, k), K in p.cubic.items():
        out.add_term(PauliString.from_map(p.n, {i: "Z", j: "Z", k: "Z"}), K)
    return out


def build_hi_sum(n: int, hx, hb) -> PauliSum:
    """Mixer Hamiltonian: transverse field plus longitudinal bias."""
    out = PauliSum.zero(n)
    for j in range(n):
        out.add_term(PauliString.from_map(n, {j: "X"}), hx[j])
        if hb[j] != 0.0:
            out.add_term(PauliString.from_map(n, {j: "Z"}), hb[j])
    return out


def build_o1_symbolic(p: HuboProblem, d: DriveSpec, b: BiasState) -> PauliSum:
    """First commutator [H_i, H_f]; anti-Hermitian, independent of the bias."""
    hx = d.hx_vector(p.n)
    if b.hb.shape != (p.n,):
        raise ValueError("bias length does not match problem size")
    return commutator(build_hi_sum(p.n, hx, b.hb), build_hf_sum(p))


def sat_o1_direct(c: CnfInstance, d: DriveSpec, hx=None) -> PauliSum:
    """First commutator for a CNF cost function, built term-by-term per clause.

    Equivalent to build_o1_symbolic on the expanded 3-local problem, but
    emitted directly from each clause's spin-polynomial expansion: every
    Z-monomial of weight w yields one Y-dressed string per participating
    qubit with coefficient -2i * w * hx at the Y site.
    """
    n = c.n_vars
    hx = d.hx_vector(n) if hx is None else hx
    out = PauliSum.zero(n)
    for cl in c.clauses:
        signs = [(-1.0 if not neg else 1.0) for neg in cl.negated]
        w8 = cl.weight / 8.0
        for mask in range(1, 8):
            idx = [cl.vars[bb] for bb in range(3) if mask >> bb & 1]
            coeff = w8
            for bb in range(3):
                if mask >> bb & 1:
                    coeff *= signs[bb]
            for y_site in idx:
                ops = {v: "Z" for v in idx}
                ops[y_site] = "Y"
                out.add_term(
                    PauliString.from_map(n, ops), -2j * coeff * hx[y_site]
                )
    return out


# --- closed-form Hilbert-Schmidt norms ---


def gamma1(p: HuboProblem, d: DriveSpec) -> float:
    """Squared norm of the first commutator, directly from the coefficients."""
    hx2 = d.hx_vector(p.n) ** 2
    g = 0.0
    for i, h in p.linear.items():
        g += hx2[i] * h * h
    for (i, j), J in p.quadratic.items():
        g += (hx2[i] + hx2[j]) * J * J
    for (i, j, k), K in p.cubic.items():
        g += (hx2[i] + hx2[j] + hx2[k]) * K * K
    return 4.0 * g


def _kk_pairs_sharing_two(cubic):
    """Unordered pairs of cubic terms whose index sets overlap in exactly two sites."""
    by_pair = {}
    for t in cubic:
        for drop in range(3):
            key = tuple(v for m, v in enumerate(t) if m != drop)
            by_pair.setdefault(key, []).append(t)
    seen = set()
    for shared, bucket in by_pair.items():
        for a in range(len(bucket)):
            for bb in range(a + 1, len(bucket)):
                ta, tb = bucket[a], bucket[bb]
                pair = (ta, tb) if ta < tb else (tb, ta)
                if pair not in seen:
                    seen.add(pair)
                    yield pair, shared


def gamma2(p: HuboProblem, d: DriveSpec, b: BiasState, lam: float) -> float:
    """Closed-form squared norm of the second commutator at interpolation lam.

    Assembled sparsely from the stored coefficients so chains of hundreds of
    sites stay cheap. Structured as ten contribution blocks: per-site,
    per-pair, per-triple string families plus the cross terms that spread
    over four and five sites.
    """
    n = p.n
    hx = d.hx_vector(n)
    hx2 = hx * hx
    hb = np.asarray(b.hb, dtype=float)
    if hb.shape != (n,):
        raise ValueError("bias length does not match problem size")
    hz = np.zeros(n)
    for i, h in p.linear.items():
        hz[i] = h
    J = p.quadratic
    K = p.cubic
    one = 1.0 - lam
    g = 0.0

    # per-site block
    sum_j2 = np.zeros(n)
    for (i, j), v in J.items():
        sum_j2[i] += v * v
        sum_j2[j] += v * v
    sum_k2 = np.zeros(n)
    for t, v in K.items():
        for i in t:
            sum_k2[i] += v * v
    for i in range(n):
        inner = one * hb[i] * hz[i] + lam * (hz[i] ** 2 + sum_j2[i] + sum_k2[i])
        g += 16.0 * hx2[i] * inner * inner

    # per-pair blocks: for pair (i, j) and emission site s in {i, j}, the
    # cross sum couples s to the third index of every triple containing both
    pair_kj = {}
    for t, kv in K.items():
        for dummy_pos in range(3):
            dummy = t[dummy_pos]
            rest = tuple(v for v in t if v != dummy)
            for s in rest:
                jkey = (s, dummy) if s < dummy else (dummy, s)
                jv = J.get(jkey)
                if jv is not None:
                    key = (rest, s)
                    pair_kj[key] = pair_kj.get(key, 0.0) + kv * jv
    pair_keys = set(pair_kj)
    for t in J:
        pair_keys.add((t, t[0]))
        pair_keys.add((t, t[1]))
    for (pair, s) in pair_keys:
        jv = J.get(pair, 0.0)
        inner = one * jv * hb[s] + 2.0 * lam * (jv * hz[s] + pair_kj.get((pair, s), 0.0))
        g += 16.0 * hx2[s] * inner * inner

    # diagonal blocks quadratic in the original coefficients
    s4 = 0.0
    for i, h in p.linear.items():
        s4 += hx2[i] ** 2 * h * h
    for (i, j), v in J.items():
        s4 += (hx2[i] + hx2[j]) ** 2 * v * v
    for (i, j, k), v in K.items():
        s4 += (hx2[i] + hx2[j] + hx2[k]) ** 2 * v * v
    g += 16.0 * one * one * s4
    s5 = 0.0
    for (i, j), v in J.items():
        s5 += hx2[i] * hx2[j] * v * v
    for (i, j, k), v in K.items():
        s5 += (hx2[i] * hx2[j] + hx2[i] * hx2[k] + hx2[j] * hx2[k]) * v * v
    g += 64.0 * one * one * s5

    # per-triple blocks: bias/field terms of each cubic coupling, products of
    # two quadratic couplings meeting at the emission site, and products of
    # two cubic couplings overlapping on the emission site plus one dummy
    tri_c2 = {}
    by_site = {}
    for (i, j), v in J.items():
        by_site.setdefault(i, []).append((j, v))
        by_site.setdefault(j, []).append((i, v))
    for s, partners in by_site.items():
        for a in range(len(partners)):
            for bb in range(a + 1, len(partners)):
                (x, vx), (y, vy) = partners[a], partners[bb]
                key = (tuple(sorted((s, x, y))), s)
                tri_c2[key] = tri_c2.get(key, 0.0) + vx * vy
    for (ta, tb), shared in _kk_pairs_sharing_two(K.keys()):
        va, vb = K[ta], K[tb]
        x = next(v for v in ta if v not in shared)
        y = next(v for v in tb if v not in shared)
        for s_pos in range(2):
            s = shared[s_pos]
            key = (tuple(sorted((s, x, y))), s)
            tri_c2[key] = tri_c2.get(key, 0.0) + va * vb
    tri_keys = set(tri_c2)
    for t in K:
        for s in t:
            tri_keys.add((t, s))
    for (t, s) in tri_keys:
        kv = K.get(t, 0.0)
        inner = one * kv * hb[s] + 2.0 * lam * (kv * hz[s] + tri_c2.get((t, s), 0.0))
        g += 16.0 * hx2[s] * inner * inner

    # four-site cross terms: cubic x quadratic sharing exactly the emission site
    k_by_site = {}
    for t, v in K.items():
        for i in t:
            k_by_site.setdefault(i, []).append((t, v))
    quad_acc = {}
    for (u, v), jv in J.items():
        for s, w in ((u, v), (v, u)):
            for t, kv in k_by_site.get(s, ()):
                if w in t:
                    continue
                key = (tuple(sorted(set(t) | {w})), s)
                quad_acc[key] = quad_acc.get(key, 0.0) + kv * jv
    for (_, s), val in quad_acc.items():
        g += 64.0 * lam * lam * hx2[s] * val * val

    # five-site cross terms: two cubics sharing exactly the emission site
    quint_acc = {}
    for s, bucket in k_by_site.items():
        for a in range(len(bucket)):
            for bb in range(a + 1, len(bucket)):
                (ta, va), (tb, vb) = bucket[a], bucket[bb]
                if len(set(ta) & set(tb)) != 1:
                    continue
                key = (tuple(sorted(set(ta) | set(tb))), s)
                quint_acc[key] = quint_acc.get(key, 0.0) + va * vb
    for (_, s), val in quint_acc.items():
        g += 64.0 * lam * lam * hx2[s] * val * val

    return float(g)


def alpha1(p: HuboProblem, d: DriveSpec, b: BiasState, lam: float) -> float:
    """First-order drive coefficient -Gamma1/Gamma2."""
    g1 = gamma1(p, d)
    if g1 == 0.0:
        g2 = gamma2(p, d, b, lam)
        if g2 <= GAMMA2_TOL:
            raise DegenerateDriveError(f"second commutator norm vanished at lam={lam}")
        return 0.0
    g2 = gamma2(p, d, b, lam)
    if g2 <= GAMMA2_TOL:
        raise DegenerateDriveError(f"second commutator norm vanished at lam={lam}")
    return -g1 / g2


# --- state preparation and circuit synthesis ---


def prepare_angles(b: BiasState, d: DriveSpec, convention: str = "hb_plus") -> np.ndarray:
    """Per-qubit Ry angles preparing the product ground state of the mixer.

    convention "hb_plus" (default) minimizes <hx sx + hb sz> per qubit;
    "hb_minus" minimizes <hx sx - hb sz>, which is the variant with the bias
    sign absorbed into the single-body operator. Both agree at zero bias.
    """
    n = len(b.hb)
    hx = d.hx_vector(n)
    if convention == "hb_plus":
        hb_eff = b.hb
    elif convention == "hb_minus":
        hb_eff = -b.hb
    else:
        raise ValueError(f"unknown convention {convention!r}")
    # Ry(theta)|0> has <sx> = sin(theta), <sz> = cos(theta); the minimizer of
    # hx sin + hb cos points opposite the field vector
    return np.arctan2(-hx, -hb_eff)


def _sorted_terms(o1: PauliSum):
    return sorted(o1.terms.items(), key=lambda item: item[0].ops)


def _emit_circuit(o1: PauliSum, p_coeffs: HuboProblem, d: DriveSpec, b: BiasState,
                  convention: str) -> Circuit:
    n = o1.n
    prep = prepare_angles(b, d, convention)
    if not o1.terms:
        return Circuit(n=n, prep_angles=prep)
    if not o1.is_anti_hermitian():
        raise ValueError("first commutator must be anti-Hermitian")
    real_terms = [(ps, (1j * c).real) for ps, c in _sorted_terms(o1)]
    dt = d.total_time / d.n_trot
    two_pi = 2 * math.pi
    rotations = []
    for k in range(1, d.n_trot + 1):
        t_k = k * dt if d.evaluation_points == "step_end" else (k - 0.5) * dt
        lam, lam_dot = schedule(t_k, d.total_time)
        if lam_dot == 0.0:
            continue
        scale = lam_dot * alpha1(p_coeffs, d, b, lam)
        for ps, c in real_terms:
            half_angle = scale * c * dt  # gamma_j(t_k) * dt
            if half_angle == 0.0 or abs(half_angle) % two_pi < d.theta_cutoff:
                continue
            rotations.append((ps, 2.0 * half_angle))
    return Circuit(n=n, prep_angles=prep, rotations=tuple(rotations))


def build_cd_circuit(p: HuboProblem, d: DriveSpec, b: BiasState,
                     convention: str = "hb_plus") -> Circuit:
    """Trotterized circuit for the drive-only evolution of a 3-local problem."""
    o1 = build_o1_symbolic(p, d, b)
    return _emit_circuit(o1, p, d, b, convention)


def build_cd_circuit_sat(c: CnfInstance, d: DriveSpec, b: BiasState,
                         convention: str = "hb_plus") -> Circuit:
    """Same pipeline for a CNF cost function, with the commutator built per clause."""
    o1 = sat_o1_direct(c, d)
    return _emit_circuit(o1, cnf_to_hubo(c), d, b, convention)
