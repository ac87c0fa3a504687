"""Packed antisymmetric pair-index algebra and the symmetric-matrix substrate.

Every two-particle quantity in this package lives on the antisymmetric pair
space of r spin orbitals: packed dimension r(r-1)/2, lexicographic pair order
(0,1), (0,2), ..., (r-2,r-1).  The packed element D[(ij),(kl)] for i<j, k<l
is the full-tensor expectation <a_i+ a_j+ a_l a_k>, so the packed trace of a
2-RDM is N(N-1)/2.  All arithmetic is real; target systems have real
symmetric matrices throughout.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

SYMMETRY_TOL = 1e-8


class PairBasis:
    """Indexing of ordered orbital pairs (i<j) over r spin orbitals."""

    def __init__(self, r: int):
        if r < 2:
            raise ValueError("pair basis needs at least two orbitals, got r=%d" % r)
        self.r = r
        self.dim = r * (r - 1) // 2
        pairs = [(i, j) for i in range(r) for j in range(i + 1, r)]
        self.pi = np.array([p[0] for p in pairs], dtype=np.intp)
        self.pj = np.array([p[1] for p in pairs], dtype=np.intp)
        # index table with -1 on the diagonal; sign flips when orbitals swap
        self._index = np.full((r, r), -1, dtype=np.intp)
        for a, (i, j) in enumerate(pairs):
            self._index[i, j] = a
            self._index[j, i] = a

    def index_of(self, i: int, j: int):
        """Packed index and sign of the orbital pair (i, j).

        Sign is +1 for i<j and -1 for i>j, matching antisymmetry of the
        underlying operators.
        """
        r = self.r
        if not (0 <= i < r and 0 <= j < r):
            raise ValueError("orbital out of range: (%d, %d) with r=%d" % (i, j, r))
        if i == j:
            raise ValueError("diagonal pair not in antisymmetric space")
        return int(self._index[i, j]), (1 if i < j else -1)

    def pair_of(self, a: int):
        if not 0 <= a < self.dim:
            raise ValueError("packed index %d out of range" % a)
        return int(self.pi[a]), int(self.pj[a])

    def __eq__(self, other):
        return isinstance(other, PairBasis) and other.r == self.r

    def __hash__(self):
        return hash(("PairBasis", self.r))

    def __repr__(self):
        return "PairBasis(r=%d, dim=%d)" % (self.r, self.dim)

    # -- conversions between packed matrices and full four-index tensors --

    def to_full(self, m: np.ndarray) -> np.ndarray:
        """Expand a packed matrix to the antisymmetric (r,r,r,r) tensor."""
        r = self.r
        T = np.zeros((r, r, r, r))
        T[self.pi[:, None], self.pj[:, None], self.pi[None, :], self.pj[None, :]] = m
        T = T - T.transpose(1, 0, 2, 3)
        T = T - T.transpose(0, 1, 3, 2)
        return T

    def functional_to_packed(self, W: np.ndarray) -> np.ndarray:
        """Packed representative Z of a full-tensor functional W.

        Defined so that Tr(Z D_packed) = sum_{ijkl} W[i,j,k,l] * Dtilde[i,j,k,l]
        for every packed D; both antisymmetrizers are applied, no division.
        """
        A = W - W.transpose(1, 0, 2, 3)
        A = A - A.transpose(0, 1, 3, 2)
        return A[self.pi[:, None], self.pj[:, None], self.pi[None, :], self.pj[None, :]]


@dataclass
class PackedMatrix:
    """Real symmetric matrix over a PairBasis."""

    basis: PairBasis
    m: np.ndarray

    def __post_init__(self):
        self.m = np.asarray(self.m, dtype=float)
        d = self.basis.dim
        if self.m.shape != (d, d):
            raise ValueError("expected shape (%d, %d), got %s" % (d, d, self.m.shape))

    @classmethod
    def zeros(cls, basis: PairBasis) -> "PackedMatrix":
        return cls(basis, np.zeros((basis.dim, basis.dim)))

    @classmethod
    def identity(cls, basis: PairBasis) -> "PackedMatrix":
        return cls(basis, np.eye(basis.dim))

    def symmetrized(self) -> "PackedMatrix":
        return PackedMatrix(self.basis, 0.5 * (self.m + self.m.T))

    def trace(self) -> float:
        return float(np.trace(self.m))

    def norm(self) -> float:
        return float(np.linalg.norm(self.m))

    def copy(self) -> "PackedMatrix":
        return PackedMatrix(self.basis, self.m.copy())


@dataclass
class Spectrum:
    """Eigendecomposition with nonincreasing eigenvalues."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray = field(repr=False)


def hermitian_inner_product(A: PackedMatrix, B: PackedMatrix) -> float:
    """Tr(A B) for symmetric packed matrices."""
    if A.basis != B.basis:
        raise ValueError("pair-basis mismatch: %r vs %r" % (A.basis, B.basis))
    return float(np.tensordot(A.m, B.m))


def eigendecompose(M: PackedMatrix) -> Spectrum:
    """Spectrum of a symmetric packed matrix, eigenvalues sorted descending."""
    asym = np.abs(M.m - M.m.T).max()
    if asym > SYMMETRY_TOL * max(1.0, np.abs(M.m).max()):
        raise ValueError("matrix not symmetric: asymmetry %.3e" % asym)
    vals, vecs = np.linalg.eigh(0.5 * (M.m + M.m.T))
    return Spectrum(vals[::-1].copy(), vecs[:, ::-1].copy())


def psd_project(M: PackedMatrix) -> PackedMatrix:
    """Nearest positive semidefinite matrix: clip negative eigenvalues."""
    return PackedMatrix(M.basis, psd_part(0.5 * (M.m + M.m.T)))


def psd_part(m: np.ndarray) -> np.ndarray:
    """Positive part of a symmetric ndarray (raw-array form used by solvers)."""
    vals, vecs = np.linalg.eigh(m)
    pos = vals > 0.0
    if not pos.any():
        return np.zeros_like(m)
    V = vecs[:, pos]
    return (V * vals[pos]) @ V.T
