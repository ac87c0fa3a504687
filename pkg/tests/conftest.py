"""Shared fixtures: bundled systems, cached oracle solves, Fock-space helpers.

The Fock-space helpers build dense creation operators on the full 2**r
space.  They are deliberately independent of the packed pair-basis code so
that every lifted map in the package can be checked against first
principles: an operator average in a random wavefunction.
"""
import os

import numpy as np
import pytest

from rdmcone import (PairBasis, PackedMatrix, TwoRDM,
                     assemble_reduced_hamiltonian, fci_ground_state,
                     hubbard_chain, parse_fcidump)

FIXDIR = os.path.join(os.path.dirname(__file__), "fixtures")


def fixture_path(name):
    return os.path.join(FIXDIR, name)


# -- dense Fock-space oracle -------------------------------------------------

def creation_ops(r):
    """Dense matrix for each creation operator on the 2**r Fock space."""
    dim = 1 << r
    ops = []
    for p in range(r):
        bp = 1 << p
        mat = np.zeros((dim, dim))
        for m in range(dim):
            if not (m & bp):
                sign = 1 - 2 * (bin(m & (bp - 1)).count("1") & 1)
                mat[m | bp, m] = sign
        ops.append(mat)
    return ops


def random_state(r, N, rng):
    """Normalized random vector supported on the N-particle sector."""
    dim = 1 << r
    idx = [m for m in range(dim) if bin(m).count("1") == N]
    psi = np.zeros(dim)
    psi[idx] = rng.standard_normal(len(idx))
    psi /= np.linalg.norm(psi)
    return psi


def oracle_rdm2(psi, r, N):
    """Packed 2-RDM from operator averages, element by element."""
    cre = creation_ops(r)
    ann = [c.T for c in cre]
    basis = PairBasis(r)
    d = basis.dim
    D = np.zeros((d, d))
    for a in range(d):
        i, j = basis.pair_of(a)
        for b in range(d):
            k, l = basis.pair_of(b)
            D[a, b] = psi @ (cre[i] @ cre[j] @ ann[l] @ ann[k]) @ psi
    return TwoRDM(PackedMatrix(basis, D), N)


def oracle_hole_matrix(psi, r):
    """Packed hole-hole matrix <a_i a_j a_l+ a_k+> from operator averages."""
    cre = creation_ops(r)
    ann = [c.T for c in cre]
    basis = PairBasis(r)
    d = basis.dim
    Q = np.zeros((d, d))
    for a in range(d):
        i, j = basis.pair_of(a)
        for b in range(d):
            k, l = basis.pair_of(b)
            Q[a, b] = psi @ (ann[i] @ ann[j] @ cre[l] @ cre[k]) @ psi
    return Q


def oracle_phole_matrix(psi, r):
    """Particle-hole matrix <a_i+ a_j a_l+ a_k> indexed by i*r+j."""
    cre = creation_ops(r)
    ann = [c.T for c in cre]
    G = np.zeros((r * r, r * r))
    for i in range(r):
        for j in range(r):
            for k in range(r):
                for l in range(r):
                    G[i * r + j, k * r + l] = (
                        psi @ (cre[i] @ ann[j] @ cre[l] @ ann[k]) @ psi)
    return G


# -- cached systems ----------------------------------------------------------

@pytest.fixture(scope="session")
def l2u4():
    ints = hubbard_chain(2, 1.0, 4.0)
    return ints, fci_ground_state(ints), assemble_reduced_hamiltonian(ints, 2)


@pytest.fixture(scope="session")
def l4u4():
    ints = hubbard_chain(4, 1.0, 4.0)
    return ints, fci_ground_state(ints), assemble_reduced_hamiltonian(ints, 4)


@pytest.fixture(scope="session")
def l4u0():
    ints = hubbard_chain(4, 1.0, 0.0)
    return ints, fci_ground_state(ints), assemble_reduced_hamiltonian(ints, 4)


@pytest.fixture(scope="session")
def h2_fixture():
    ints = parse_fcidump(fixture_path("h2_sto3g.fcidump"))
    return ints, fci_ground_state(ints), assemble_reduced_hamiltonian(ints, 2)


@pytest.fixture(scope="session")
def h4_fixture():
    ints = parse_fcidump(fixture_path("h4_sto3g.fcidump"))
    return ints, fci_ground_state(ints), assemble_reduced_hamiltonian(ints, 4)
