"""Matrix-product-state backend for nearest-neighbour-chain circuits.

Tensors are stored site by site as (left bond, physical=2, right bond)
arrays in mixed-canonical form around an explicit center. Gates must act on
at most three contiguous sites; the windowed block is contracted, the gate
applied, and the window re-split by SVD with bond truncation.
"""
from __future__ import annotations

import math

import numpy as np

from .cd import Circuit
from .pauli import PauliString
from .samples import SampleSet

__all__ = ["MpsState", "UnsupportedGateError", "mps_prepare",
           "mps_apply_rotation", "mps_run_circuit", "mps_sample", "avg_entropy"]

_PAULI_MATS = {
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
    "I": np.eye(2, dtype=complex),
}


class UnsupportedGateError(ValueError):
    """Gate support is non-contiguous or wider than three sites."""


class MpsState:
    """Mixed-canonical MPS; tensors left of the center are left-isometric,
    tensors right of it right-isometric."""

    def __init__(self, tensors, max_bond=None, trunc_cutoff=1e-12, center=0):
        self.tensors = list(tensors)
        self.n = len(self.tensors)
        self.max_bond = max_bond
        self.trunc_cutoff = trunc_cutoff
        self.center = center
        self.last_discarded_weight = 0.0

    @property
    def bond_dims(self):
        return [self.tensors[i].shape[2] for i in range(self.n - 1)]

    def copy(self):
        out = MpsState([t.copy() for t in self.tensors], self.max_bond,
                       self.trunc_cutoff, self.center)
        return out

    # --- canonical form maintenance ---

    def _truncate_svd(self, mat):
        """SVD with discarded-weight truncation; returns (U, s, Vh)."""
        try:
            u, s, vh = np.linalg.svd(mat, full_matrices=False)
        except np.linalg.LinAlgError:
            u, s, vh = np.linalg.svd(mat + 1e-32, full_matrices=False)
        sq = s ** 2
        total = sq.sum()
        keep = len(s)
        if total > 0 and self.trunc_cutoff > 0:
            tail = np.cumsum(sq[::-1])[::-1]  # tail[k] = sum of sq[k:]
            ok = np.nonzero(tail / total <= self.trunc_cutoff)[0]
            if len(ok):
                keep = max(1, int(ok[0]))
        if self.max_bond is not None:
            keep = min(keep, self.max_bond)
        keep = max(1, keep)
        self.last_discarded_weight = float(sq[keep:].sum() / total) if total > 0 else 0.0
        u, s, vh = u[:, :keep], s[:keep], vh[:keep]
        norm = np.linalg.norm(s)
        if norm > 0:
            s = s / norm
        return u, s, vh

    def move_center(self, site):
        """Shift the canonical center by QR sweeps (no truncation)."""
        while self.center < site:
            i = self.center
            t = self.tensors[i]
            dl, d, dr = t.shape
            q, r = np.linalg.qr(t.reshape(dl * d, dr))
            self.tensors[i] = q.reshape(dl, d, -1)
            self.tensors[i + 1] = np.einsum("ab,bcd->acd", r, self.tensors[i + 1])
            self.center += 1
        while self.center > site:
            i = self.center
            t = self.tensors[i]
            dl, d, dr = t.shape
            q, r = np.linalg.qr(t.reshape(dl, d * dr).conj().T)
            self.tensors[i] = q.conj().T.reshape(-1, d, dr)
            self.tensors[i - 1] = np.einsum("abc,cd->abd", self.tensors[i - 1], r.conj().T)
            self.center -= 1

    def apply_gate(self, sites, gate):
        """Contract a 2^k x 2^k unitary into k contiguous sites and re-split."""
        k = len(sites)
        first = sites[0]
        self.move_center(first)
        theta = self.tensors[first]
        for off in range(1, k):
            theta = np.tensordot(theta, self.tensors[first + off], axes=([-1], [0]))
        # theta: (dl, 2, ..., 2, dr); fuse physical legs, apply, split back
        dl = theta.shape[0]
        dr = theta.shape[-1]
        theta = theta.reshape(dl, 2 ** k, dr)
        theta = np.einsum("pq,aqb->apb", gate, theta)
        if k == 1:
            self.tensors[first] = theta.reshape(dl, 2, dr)
            return
        theta = theta.reshape(dl, *([2] * k), dr)
        left_dim = dl
        for off in range(k - 1):
            remaining = k - off - 1
            mat = theta.reshape(left_dim * 2, 2 ** remaining * dr)
            u, s, vh = self._truncate_svd(mat)
            self.tensors[first + off] = u.reshape(left_dim, 2, -1)
            theta = (s[:, None] * vh).reshape(len(s), *([2] * remaining), dr)
            left_dim = len(s)
        self.tensors[first + k - 1] = theta.reshape(left_dim, 2, dr)
        self.center = first + k - 1

    # --- observables ---

    def bond_spectra(self):
        """Singular values at every bond via a left-to-right sweep."""
        work = self.copy()
        work.move_center(0)
        spectra = []
        for i in range(work.n - 1):
            t = work.tensors[i]
            dl, d, dr = t.shape
            u, s, vh = np.linalg.svd(t.reshape(dl * d, dr), full_matrices=False)
            norm = np.linalg.norm(s)
            spectra.append(s / norm if norm > 0 else s)
            work.tensors[i] = u.reshape(dl, d, -1)
            work.tensors[i + 1] = np.einsum("ab,bcd->acd",
                                            (s[:, None] * vh), work.tensors[i + 1])
            work.center = i + 1
        return spectra

    def to_statevector(self, limit=20):
        if self.n > limit:
            raise ValueError(f"n={self.n} too large to densify")
        acc = self.tensors[0]
        for i in range(1, self.n):
            acc = np.tensordot(acc, self.tensors[i], axes=([-1], [0]))
        vec = acc.reshape(-1)
        return vec

    def norm(self):
        return float(np.linalg.norm(
            self.tensors[self.center].reshape(-1)))


def mps_prepare(prep_angles, max_bond=None, trunc_cutoff=1e-12) -> MpsState:
    """Bond-dimension-1 product state with per-site (cos theta/2, sin theta/2)."""
    tensors = []
    for theta in prep_angles:
        t = np.zeros((1, 2, 1), dtype=complex)
        t[0, 0, 0] = math.cos(theta / 2)
        t[0, 1, 0] = math.sin(theta / 2)
        tensors.append(t)
    return MpsState(tensors, max_bond=max_bond, trunc_cutoff=trunc_cutoff, center=0)


def _rotation_matrix(p: PauliString, sites, theta):
    k = len(sites)
    op = np.array([[1.0]], dtype=complex)
    opmap = dict(p.ops)
    for q in sites:
        op = np.kron(op, _PAULI_MATS[opmap.get(q, "I")])
    return math.cos(theta / 2) * np.eye(2 ** k) - 1j * math.sin(theta / 2) * op


def mps_apply_rotation(m: MpsState, p: PauliString, theta: float) -> MpsState:
    """Apply exp(-i theta/2 P) for P supported on <= 3 contiguous sites (in place)."""
    support = p.support
    if not support:
        raise UnsupportedGateError("identity rotation has no support")
    lo, hi = support[0], support[-1]
    if hi - lo + 1 > 3:
        raise UnsupportedGateError(f"support {support} spans more than 3 sites")
    sites = tuple(range(lo, hi + 1))
    m.apply_gate(sites, _rotation_matrix(p, sites, theta))
    return m


def mps_run_circuit(c: Circuit, max_bond=None, trunc_cutoff=1e-12) -> MpsState:
    m = mps_prepare(c.prep_angles, max_bond=max_bond, trunc_cutoff=trunc_cutoff)
    for p, theta in c.rotations:
        mps_apply_rotation(m, p, theta)
    return m


def mps_sample(m: MpsState, n_shots: int, seed: int) -> SampleSet:
    """Perfect sampling site by site, vectorized over shots."""
    if n_shots < 1:
        raise ValueError("need at least one shot")
    work = m.copy()
    work.move_center(0)
    rng = np.random.default_rng(seed)
    bits = np.zeros((n_shots, work.n), dtype=np.int8)
    # v: per-shot left environment, shape (shots, chi)
    v = np.ones((n_shots, 1), dtype=complex)
    for i in range(work.n):
        t = work.tensors[i]  # (chiL, 2, chiR)
        branch = np.einsum("sa,apb->spb", v, t)  # (shots, 2, chiR)
        p_all = np.sum(np.abs(branch) ** 2, axis=2)  # (shots, 2)
        p_total = p_all.sum(axis=1)
        p1 = np.divide(p_all[:, 1], p_total, out=np.zeros(n_shots), where=p_total > 0)
        chosen = (rng.random(n_shots) < p1).astype(np.int8)
        bits[:, i] = chosen
        v = branch[np.arange(n_shots), chosen, :]
        nrm = np.linalg.norm(v, axis=1, keepdims=True)
        v = np.divide(v, nrm, out=np.zeros_like(v), where=nrm > 0)
    strings = ["".join(str(b) for b in row) for row in bits]
    uniq = {}
    for sbits in strings:
        uniq[sbits] = uniq.get(sbits, 0) + 1
    return SampleSet(n=work.n, entries=sorted(uniq.items()))


def avg_entropy(m: MpsState) -> float:
    """Mean over bonds of the von Neumann entropy in bits."""
    spectra = m.bond_spectra()
    total = 0.0
    for s in spectra:
        sq = s ** 2
        sq = sq[sq > 1e-30]
        total += float(-np.sum(sq * np.log2(sq)))
    return total / len(spectra) if spectra else 0.0
