"""Determinant-space full CI: the internal oracle the relaxations are judged against.

Determinants are orbital-occupation bitmasks over r = 2*norb interleaved spin
orbitals (bit 2p alpha, bit 2p+1 beta of spatial p).  The Hamiltonian acts
through the packed reduced operator K, so a single kernel serves both the
matrix build and the 2-RDM assembly; the fermionic phase of moving an
operator to orbital p is the parity of the occupied bits below p.

Small sectors are diagonalized densely, mid-size ones with Lanczos on a
sparse copy.  Large active spaces are out of scope: the determinant count is
guarded and the dense column build has an explicit ceiling.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from math import comb

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from . import _kernels
from .hamiltonians import IntegralSet, assemble_reduced_hamiltonian, spin_orbital_h
from .nrep import OneRDM, TwoRDM
from .pairspace import PairBasis, PackedMatrix

SECTOR_GUARD = 1_000_000
DENSE_CUTOFF = 2000
BUILD_CEILING = 6000
DEGENERACY_GAP = 1e-8


@dataclass
class DeterminantBasis:
    """Ascending bitmask list spanning one (n_alpha, n_beta) sector."""

    r: int
    n_alpha: int
    n_beta: int
    masks: np.ndarray = field(repr=False)

    @property
    def dimension(self):
        return len(self.masks)


@dataclass
class FCIResult:
    energy: float
    vector: np.ndarray
    basis: DeterminantBasis
    rdm2: TwoRDM
    rdm1: OneRDM
    gap: float
    degenerate: bool


def determinant_basis(r: int, n_alpha: int, n_beta: int) -> DeterminantBasis:
    """All determinants with the given spin occupation counts, masks ascending."""
    if r % 2:
        raise ValueError("spin-orbital count must be even, got r=%d" % r)
    norb = r // 2
    if not (0 <= n_alpha <= norb and 0 <= n_beta <= norb):
        raise ValueError("empty sector: (n_alpha, n_beta)=(%d, %d) with %d spatial orbitals"
                         % (n_alpha, n_beta, norb))
    alphas = [sum(1 << (2 * p) for p in occ)
              for occ in combinations(range(norb), n_alpha)]
    betas = [sum(1 << (2 * p + 1) for p in occ)
             for occ in combinations(range(norb), n_beta)]
    masks = np.array(sorted(a | b for a in alphas for b in betas), dtype=np.int64)
    return DeterminantBasis(r=r, n_alpha=n_alpha, n_beta=n_beta, masks=masks)


def apply_operator_string(mask: int, ops) -> tuple:
    """Apply a sequence of ladder operators to a determinant.

    `ops` is an iterable of (kind, orbital) with kind "c"/"+" for creation and
    "a"/"-" for annihilation; the first element acts first.  Returns
    (new_mask, phase), or (None, 0) when any step annihilates the state.
    """
    phase = 1
    m = int(mask)
    for kind, p in ops:
        bit = 1 << p
        if kind in ("c", "+"):
            if m & bit:
                return None, 0
        elif kind in ("a", "-"):
            if not (m & bit):
                return None, 0
        else:
            raise ValueError("operator kind must be 'c'/'+' or 'a'/'-', got %r" % (kind,))
        if bin(m & (bit - 1)).count("1") & 1:
            phase = -phase
        m ^= bit
    return m, phase


def _rdm1_from_vector(masks, psi, r):
    """Spin-orbital 1-RDM <a_p+ a_q> accumulated directly over determinants."""
    index = {int(m): i for i, m in enumerate(masks)}
    g = np.zeros((r, r))
    for col in range(len(masks)):
        c = psi[col]
        if c == 0.0:
            continue
        m = int(masks[col])
        for q in range(r):
            if not (m >> q) & 1:
                continue
            ph1 = 1 - 2 * (bin(m & ((1 << q) - 1)).count("1") & 1)
            m1 = m ^ (1 << q)
            for p in range(r):
                if (m1 >> p) & 1:
                    continue
                ph2 = 1 - 2 * (bin(m1 & ((1 << p) - 1)).count("1") & 1)
                row = index.get(m1 | (1 << p))
                if row is not None:
                    g[p, q] += psi[row] * c * ph1 * ph2
    return 0.5 * (g + g.T)


def _sector_counts(N, ms2, norb):
    if (N + ms2) % 2:
        raise ValueError("N=%d and ms2=%d have incompatible parity" % (N, ms2))
    na = (N + ms2) // 2
    nb = (N - ms2) // 2
    if not (0 <= na <= norb and 0 <= nb <= norb):
        raise ValueError("empty sector: N=%d, ms2=%d needs (%d, %d) spins in %d orbitals"
                         % (N, ms2, na, nb, norb))
    return na, nb


def fci_ground_state(ints: IntegralSet, N: int = None, ms2: int = None) -> FCIResult:
    """Ground state of the given integrals in one (N, ms2) sector.

    Defaults come from the IntegralSet; an ms2 default whose parity clashes
    with an overridden N falls back to N % 2.  The reported energy includes
    the core term, the ground vector's dominant coefficient is made positive,
    and a gap below 1e-8 sets the degenerate flag (the RDMs of a degenerate
    ground space depend on which member Lanczos returns).
    """
    if N is None:
        N = ints.n_electrons
    if ms2 is None:
        ms2 = ints.ms2 if (ints.ms2 - N) % 2 == 0 else N % 2
    if N < 1:
        raise ValueError("need at least one particle, got N=%d" % N)
    r = 2 * ints.norb
    if N > r:
        raise ValueError("N=%d exceeds the %d available spin orbitals" % (N, r))
    basis = PairBasis(r)

    if N == 1:
        return _one_particle_ground(ints, ms2, basis)

    if comb(r, N) > SECTOR_GUARD:
        raise ValueError("C(%d, %d) determinants exceed the %d sector guard"
                         % (r, N, SECTOR_GUARD))
    na, nb = _sector_counts(N, ms2, ints.norb)
    det = determinant_basis(r, na, nb)
    nd = det.dimension
    if nd > BUILD_CEILING:
        raise ValueError("sector dimension %d exceeds the dense column build "
                         "ceiling %d" % (nd, BUILD_CEILING))

    red = assemble_reduced_hamiltonian(ints, N)
    Kc = np.ascontiguousarray(red.K.m)
    idx = np.ascontiguousarray(basis._index, dtype=np.int64)
    pi = np.ascontiguousarray(basis.pi, dtype=np.int64)
    pj = np.ascontiguousarray(basis.pj, dtype=np.int64)
    H = _kernels.sector_hamiltonian(det.masks, Kc, r, idx, pi, pj)

    if nd <= DENSE_CUTOFF:
        vals, vecs = np.linalg.eigh(H)
        e0, psi = vals[0], vecs[:, 0]
        gap = float(vals[1] - vals[0]) if nd > 1 else np.inf
    else:
        Hs = sp.csr_matrix(H)
        del H
        v0 = np.full(nd, 1.0 / np.sqrt(nd))
        vals, vecs = spla.eigsh(Hs, k=2, which="SA", v0=v0)
        order = np.argsort(vals)
        e0, psi = vals[order[0]], vecs[:, order[0]]
        gap = float(vals[order[1]] - vals[order[0]])

    if psi[np.argmax(np.abs(psi))] < 0:
        psi = -psi
    D = _kernels.rdm2_from_vector(det.masks, np.ascontiguousarray(psi), r, idx, pi, pj)
    D = 0.5 * (D + D.T)
    g = _rdm1_from_vector(det.masks, psi, r)
    return FCIResult(energy=float(e0) + ints.core_energy,
                     vector=psi, basis=det,
                     rdm2=TwoRDM(PackedMatrix(basis, D), N),
                     rdm1=OneRDM(g, N),
                     gap=gap, degenerate=gap < DEGENERACY_GAP)


def _one_particle_ground(ints, ms2, basis):
    # One particle has no pair structure: diagonalize the spin-orbital h
    # in the requested spin channel, 2-RDM identically zero.
    if ms2 not in (1, -1):
        raise ValueError("a single particle needs ms2 = +1 or -1, got %d" % ms2)
    r = 2 * ints.norb
    offset = 0 if ms2 == 1 else 1
    orbs = np.arange(offset, r, 2)
    hso = spin_orbital_h(ints)
    hs = hso[np.ix_(orbs, orbs)]
    vals, vecs = np.linalg.eigh(hs)
    v = vecs[:, 0]
    if v[np.argmax(np.abs(v))] < 0:
        v = -v
    gap = float(vals[1] - vals[0]) if len(vals) > 1 else np.inf
    g = np.zeros((r, r))
    g[np.ix_(orbs, orbs)] = np.outer(v, v)
    masks = np.array(sorted(np.int64(1) << np.int64(p) for p in orbs), dtype=np.int64)
    det = DeterminantBasis(r=r, n_alpha=1 if ms2 == 1 else 0,
                           n_beta=0 if ms2 == 1 else 1, masks=masks)
    psi = np.zeros(len(masks))
    # determinant order is ascending mask = ascending orbital within the channel
    psi[:] = v
    return FCIResult(energy=float(vals[0]) + ints.core_energy,
                     vector=psi, basis=det,
                     rdm2=TwoRDM(PackedMatrix.zeros(basis), 1),
                     rdm1=OneRDM(g, 1),
                     gap=gap, degenerate=gap < DEGENERACY_GAP)
