"""Reference and baseline solvers: brute force, boundary-state dynamic
programming for finite-range chains, simulated annealing, zero-temperature
local search, and Tabu search.

The flip-based heuristics run inside numba kernels. Per-read seeds are
derived deterministically by mixing the read index into the user seed, and
within a sweep sites are proposed in sequential order.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np
from numba import njit

from .hubo import HuboProblem, energy

__all__ = ["AnnealParams", "TabuParams", "brute_force", "exact_dp",
           "simulated_annealing", "local_search", "tabu_search", "term_arrays"]

BRUTE_FORCE_LIMIT = 24
_CHUNK_BITS = 20


@dataclass(frozen=True)
class AnnealParams:
    reads: int = 100
    sweeps: int = 1000
    t_initial: float = 2.0
    t_final: float = 0.05

    def __post_init__(self):
        if not (self.t_initial >= self.t_final > 0):
            raise ValueError("need t_initial >= t_final > 0")
        if self.reads < 1 or self.sweeps < 1:
            raise ValueError("reads and sweeps must be >= 1")


@dataclass(frozen=True)
class TabuParams:
    reads: int = 100
    tenure: int = 10
    max_stagnation: int = 100

    def __post_init__(self):
        if self.reads < 1 or self.tenure < 0 or self.max_stagnation < 1:
            raise ValueError("invalid Tabu parameters")


def term_arrays(p: HuboProblem):
    """Flat (coeff, i, j, k) arrays with -1 padding for vectorized evaluation."""
    coeffs, idx = [], []
    for i, v in sorted(p.linear.items()):
        coeffs.append(v)
        idx.append((i, -1, -1))
    for (i, j), v in sorted(p.quadratic.items()):
        coeffs.append(v)
        idx.append((i, j, -1))
    for (i, j, k), v in sorted(p.cubic.items()):
        coeffs.append(v)
        idx.append((i, j, k))
    return (np.array(coeffs, dtype=np.float64),
            np.array(idx, dtype=np.int64).reshape(-1, 3))


def _site_adjacency(p: HuboProblem):
    """CSR-style per-site term lists: (ptr, coeff, partner1, partner2)."""
    per_site = [[] for _ in range(p.n)]
    for i, v in p.linear.items():
        per_site[i].append((v, -1, -1))
    for (i, j), v in p.quadratic.items():
        per_site[i].append((v, j, -1))
        per_site[j].append((v, i, -1))
    for (i, j, k), v in p.cubic.items():
        per_site[i].append((v, j, k))
        per_site[j].append((v, i, k))
        per_site[k].append((v, i, j))
    ptr = np.zeros(p.n + 1, dtype=np.int64)
    for i in range(p.n):
        ptr[i + 1] = ptr[i] + len(per_site[i])
    coeff = np.zeros(ptr[-1])
    p1 = np.full(ptr[-1], -1, dtype=np.int64)
    p2 = np.full(ptr[-1], -1, dtype=np.int64)
    pos = 0
    for i in range(p.n):
        for v, a, b in per_site[i]:
            coeff[pos], p1[pos], p2[pos] = v, a, b
            pos += 1
    return ptr, coeff, p1, p2


def _energies_for_indices(p: HuboProblem, indices: np.ndarray) -> np.ndarray:
    """Energies of basis-index bitstrings (qubit 0 = most significant bit)."""
    coeffs, idx = term_arrays(p)
    spins = 1 - 2 * ((indices[:, None] >> (p.n - 1 - np.arange(p.n))) & 1)
    e = np.full(len(indices), p.offset)
    for t in range(len(coeffs)):
        prod = spins[:, idx[t, 0]].astype(np.float64)
        if idx[t, 1] >= 0:
            prod = prod * spins[:, idx[t, 1]]
        if idx[t, 2] >= 0:
            prod = prod * spins[:, idx[t, 2]]
        e += coeffs[t] * prod
    return e


def brute_force(p: HuboProblem, limit: int = BRUTE_FORCE_LIMIT):
    """Exhaustive minimum; returns (E0, list of all optimal assignments)."""
    if p.n > limit:
        raise ValueError(f"n={p.n} exceeds brute-force limit {limit}")
    best_e = np.inf
    best_idx = []
    for start in range(0, 2 ** p.n, 2 ** _CHUNK_BITS):
        stop = min(start + 2 ** _CHUNK_BITS, 2 ** p.n)
        indices = np.arange(start, stop, dtype=np.int64)
        e = _energies_for_indices(p, indices)
        chunk_min = e.min()
        if chunk_min < best_e - 1e-15:
            best_e = chunk_min
            best_idx = []
        close = indices[np.abs(e - min(best_e, chunk_min)) <= 1e-15]
        if chunk_min <= best_e + 1e-15:
            best_e = min(best_e, chunk_min)
            best_idx.extend(int(i) for i in close)
    spins = [
        np.array([1 - 2 * ((i >> (p.n - 1 - q)) & 1) for q in range(p.n)], dtype=np.int8)
        for i in sorted(set(best_idx))
    ]
    # re-evaluate through energy() so E0 is summation-order independent
    return energy(p, spins[0]), spins


def exact_dp(p: HuboProblem, r: int, retention: str = "boundary"):
    """Exact chain ground state by dynamic programming over boundary states.

    Every coupling must fit in a window of r consecutive indices. Each site
    is swept once; for every configuration of the trailing r-1 spins the
    minimal-energy prefix is retained, so the answer is exact at cost
    O(2^r N). retention="greedy" instead keeps the literal single best
    configuration at each step (not exact in general; kept for comparison).
    """
    if r < 1 or r > 20:
        raise ValueError(f"range r={r} out of supported bounds [1, 20]")
    spread = p.coupling_range()
    if spread > r:
        raise ValueError(f"coupling spread {spread} exceeds range r={r}")
    if retention not in ("boundary", "greedy"):
        raise ValueError(f"unknown retention {retention!r}")

    # terms grouped by their maximal index: energy telescopes over sites
    by_max = [[] for _ in range(p.n)]
    for i, v in p.linear.items():
        by_max[i].append(((i,), v))
    for t, v in p.quadratic.items():
        by_max[t[1]].append((t, v))
    for t, v in p.cubic.items():
        by_max[t[2]].append((t, v))

    width = r - 1
    # state: tuple of the last min(i+1, width) spins; value: (prefix energy, path)
    states = {(): (0.0, ())}
    for i in range(p.n):
        new_states = {}
        for boundary, (e_prev, path) in states.items():
            for s_i in (1, -1):
                delta = 0.0
                for idx, v in by_max[i]:
                    prod = v * s_i
                    for j in idx[:-1]:
                        prod *= path[j] if j < len(path) else s_i
                    delta += prod
                e_new = e_prev + delta
                new_boundary = (boundary + (s_i,))[-width:] if width else ()
                cur = new_states.get(new_boundary)
                if cur is None or e_new < cur[0]:
                    new_states[new_boundary] = (e_new, path + (s_i,))
        if retention == "greedy":
            best_key = min(new_states, key=lambda k: new_states[k][0])
            new_states = {best_key: new_states[best_key]}
        states = new_states
    _, path = min(states.values(), key=lambda v: v[0])
    spins = np.array(path, dtype=np.int8)
    # re-evaluate through energy() so E0 is summation-order independent
    return energy(p, spins), spins


@njit(cache=True)
def _full_energy(spins, coeffs, idx, offset):
    e = offset
    for t in range(len(coeffs)):
        prod = coeffs[t] * spins[idx[t, 0]]
        if idx[t, 1] >= 0:
            prod *= spins[idx[t, 1]]
        if idx[t, 2] >= 0:
            prod *= spins[idx[t, 2]]
        e += prod
    return e


@njit(cache=True)
def _flip_delta(spins, site, ptr, coeff, p1, p2):
    field = 0.0
    for t in range(ptr[site], ptr[site + 1]):
        v = coeff[t]
        if p1[t] >= 0:
            v *= spins[p1[t]]
        if p2[t] >= 0:
            v *= spins[p2[t]]
        field += v
    return -2.0 * spins[site] * field


@njit(cache=True)
def _anneal_kernel(n, ptr, coeff, p1, p2, tcoeffs, tidx, offset,
                   reads, sweeps, t_initial, t_final, seed, zero_temp):
    best_e = np.inf
    best_spins = np.ones(n, dtype=np.int8)
    for read in range(reads):
        np.random.seed((seed * 1000003 + read) % 4294967296)
        spins = np.empty(n, dtype=np.int8)
        for i in range(n):
            spins[i] = 1 if np.random.random() < 0.5 else -1
        fspins = spins.astype(np.float64)
        e = _full_energy(fspins, tcoeffs, tidx, offset)
        if e < best_e:
            best_e = e
            for i in range(n):
                best_spins[i] = spins[i]
        for sweep in range(sweeps):
            if zero_temp or sweeps == 1:
                temp = t_final
            else:
                temp = t_initial * (t_final / t_initial) ** (sweep / (sweeps - 1))
            for site in range(n):
                de = _flip_delta(fspins, site, ptr, coeff, p1, p2)
                accept = de <= 0.0
                if not accept and not zero_temp:
                    accept = np.random.random() < np.exp(-de / temp)
                if accept:
                    fspins[site] = -fspins[site]
                    e += de
                    if e < best_e:
                        best_e = e
                        for i in range(n):
                            best_spins[i] = np.int8(fspins[i])
    return best_e, best_spins


def _run_anneal(p, reads, sweeps, t_initial, t_final, seed, zero_temp):
    ptr, coeff, p1, p2 = _site_adjacency(p)
    tcoeffs, tidx = term_arrays(p)
    e, spins = _anneal_kernel(p.n, ptr, coeff, p1, p2, tcoeffs, tidx, p.offset,
                              reads, sweeps, t_initial, t_final, seed, zero_temp)
    return float(e), spins


def simulated_annealing(p: HuboProblem, params: AnnealParams, seed: int):
    """Single-spin-flip Metropolis with geometric cooling; best over reads."""
    return _run_anneal(p, params.reads, params.sweeps,
                       params.t_initial, params.t_final, seed, zero_temp=False)


def local_search(p: HuboProblem, reads: int, sweeps: int, seed: int):
    """Zero-temperature descent: flips accepted only when non-increasing."""
    return _run_anneal(p, reads, sweeps, 1.0, 1.0, seed, zero_temp=True)


@njit(cache=True)
def _tabu_kernel(n, ptr, coeff, p1, p2, tcoeffs, tidx, offset,
                 reads, tenure, max_stagnation, seed):
    best_e = np.inf
    best_spins = np.ones(n, dtype=np.int8)
    for read in range(reads):
        np.random.seed((seed * 1000003 + read) % 4294967296)
        fspins = np.empty(n, dtype=np.float64)
        for i in range(n):
            fspins[i] = 1.0 if np.random.random() < 0.5 else -1.0
        e = _full_energy(fspins, tcoeffs, tidx, offset)
        if e < best_e:
            best_e = e
            for i in range(n):
                best_spins[i] = np.int8(fspins[i])
        tabu_until = np.full(n, -1, dtype=np.int64)
        stagnation = 0
        step = 0
        while stagnation < max_stagnation:
            best_site = -1
            best_de = np.inf
            for site in range(n):
                de = _flip_delta(fspins, site, ptr, coeff, p1, p2)
                admissible = tabu_until[site] < step or e + de < best_e
                if admissible and de < best_de:
                    best_de = de
                    best_site = site
            if best_site < 0:
                break
            fspins[best_site] = -fspins[best_site]
            e += best_de
            tabu_until[best_site] = step + tenure
            if e < best_e - 1e-12:
                best_e = e
                for i in range(n):
                    best_spins[i] = np.int8(fspins[i])
                stagnation = 0
            else:
                stagnation += 1
            step += 1
    return best_e, best_spins


def tabu_search(p: HuboProblem, params: TabuParams, seed: int):
    """Steepest admissible single-flip search with a recency tabu list."""
    ptr, coeff, p1, p2 = _site_adjacency(p)
    tcoeffs, tidx = term_arrays(p)
    e, spins = _tabu_kernel(p.n, ptr, coeff, p1, p2, tcoeffs, tidx, p.offset,
                            params.reads, params.tenure, params.max_stagnation, seed)
    return float(e), spins
