"""Observables computed from RDMs: occupations, entropy, populations, moments.

The 1-RDM arrives in the interleaved spin-orbital basis; spatial quantities
spin-sum it as gamma_spatial[p,q] = gamma[2p,2q] + gamma[2p+1,2q+1], which
puts natural occupations on the [0, 2] scale.  Atomic-orbital quantities go
through OrbitalData (molecular-orbital coefficients over an AO basis with
its overlap), carried in a plain-text "ORBDATA 1" file so property formulas
stay decoupled from any integral generator.

Entropy convention: -sum nu ln nu over spin-orbital occupations nu in [0,1].
This is a declared choice, adjustable via the cap argument; the literature
does not always state whether spatial or spin occupations (or which log
base) enter, so the convention is a documented parameter rather than a fact.
Interatomic squared-element sums count each unordered AO pair once.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .nrep import OneRDM, TwoRDM
from .pairspace import PackedMatrix, hermitian_inner_product

DEBYE_PER_AU = 2.541746
ORTHONORMALITY_TOL = 1e-8
_SNAP = 1e-12


@dataclass
class OrbitalData:
    """Molecular orbitals over an atomic-orbital basis, plus atom bookkeeping."""

    mo_coefficients: np.ndarray
    ao_overlap: np.ndarray
    ao_to_atom: np.ndarray
    atom_labels: list
    nuclear_charges: np.ndarray
    nuclear_coordinates: np.ndarray
    dipole_integrals: np.ndarray = None  # (3, nao, nao) when present

    def __post_init__(self):
        C = np.asarray(self.mo_coefficients, dtype=float)
        S = np.asarray(self.ao_overlap, dtype=float)
        nao = C.shape[0]
        if S.shape != (nao, nao):
            raise ValueError("overlap shape %s does not match %d AOs" % (S.shape, nao))
        self.ao_to_atom = np.asarray(self.ao_to_atom, dtype=int)
        if self.ao_to_atom.shape != (nao,):
            raise ValueError("ao_to_atom must assign every AO an atom")
        natom = len(self.atom_labels)
        if self.ao_to_atom.size and (self.ao_to_atom.min() < 0
                                     or self.ao_to_atom.max() >= natom):
            raise ValueError("ao_to_atom refers to atoms outside 0..%d" % (natom - 1))
        self.nuclear_charges = np.asarray(self.nuclear_charges, dtype=float)
        self.nuclear_coordinates = np.asarray(self.nuclear_coordinates, dtype=float)
        if self.nuclear_charges.shape != (natom,):
            raise ValueError("need one nuclear charge per atom")
        if self.nuclear_coordinates.shape != (natom, 3):
            raise ValueError("nuclear coordinates must be (natom, 3) bohr")
        ortho = C.T @ S @ C - np.eye(C.shape[1])
        worst = np.abs(ortho).max() if ortho.size else 0.0
        if worst > ORTHONORMALITY_TOL:
            raise ValueError("orbitals not orthonormal under the overlap "
                             "(worst deviation %.3e)" % worst)
        if self.dipole_integrals is not None:
            D = np.asarray(self.dipole_integrals, dtype=float)
            if D.shape != (3, nao, nao):
                raise ValueError("dipole integrals must be (3, nao, nao)")
            self.dipole_integrals = D
        self.mo_coefficients = C
        self.ao_overlap = S

    @property
    def n_ao(self):
        return self.mo_coefficients.shape[0]

    @property
    def n_mo(self):
        return self.mo_coefficients.shape[1]


@dataclass
class NaturalOrbitalReport:
    occupations: np.ndarray
    raw_occupations: np.ndarray
    entropy: float
    rotation: np.ndarray = field(repr=False)
    spin_summed: bool = True
    cap: float = 2.0


def spin_summed_gamma(rdm1: OneRDM) -> np.ndarray:
    """Spatial 1-RDM: alpha and beta blocks of the interleaved basis added."""
    g = rdm1.gamma
    if g.shape[0] % 2:
        raise ValueError("spin-orbital 1-RDM must have even dimension")
    return g[0::2, 0::2] + g[1::2, 1::2]


def von_neumann_entropy(occupations, cap: float = 1.0) -> float:
    """-sum nu ln(nu/cap) with occupations clipped to [0, cap]; 0 ln 0 = 0.

    Occupations are measured against their cap (1 for spin orbitals, 2 for
    spin-summed spatial orbitals), so a filled orbital contributes zero
    either way.  Values within 1e-12 of the interval ends snap onto them,
    so an idempotent density matrix reports exactly zero.
    """
    nu = np.clip(np.asarray(occupations, dtype=float), 0.0, cap)
    if np.any(np.asarray(occupations) < -1e-8):
        raise ValueError("occupation below -1e-8; not a density spectrum")
    nu = np.where(nu < _SNAP, 0.0, nu)
    nu = np.where(nu > cap - _SNAP, cap, nu)
    pos = (nu > 0.0) & (nu < cap)
    if not pos.any():
        return 0.0
    return float(-(nu[pos] * np.log(nu[pos] / cap)).sum()) + 0.0


def natural_orbitals(rdm1: OneRDM, spin_summed: bool = True) -> NaturalOrbitalReport:
    """Diagonalize the 1-RDM; occupations nonincreasing, clipped to the scale.

    The entropy field always uses spin-orbital occupations regardless of the
    reporting flag, keeping it comparable across the two conventions.
    """
    if spin_summed:
        gs = spin_summed_gamma(rdm1)
        cap = 2.0
    else:
        gs = rdm1.gamma
        cap = 1.0
    vals, vecs = np.linalg.eigh(0.5 * (gs + gs.T))
    raw = vals[::-1].copy()
    vecs = vecs[:, ::-1].copy()
    spin_occ = np.clip(np.linalg.eigvalsh(rdm1.gamma), 0.0, 1.0)
    return NaturalOrbitalReport(occupations=np.clip(raw, 0.0, cap),
                                raw_occupations=raw,
                                entropy=von_neumann_entropy(spin_occ, cap=1.0),
                                rotation=vecs,
                                spin_summed=spin_summed,
                                cap=cap)


def _ao_density(rdm1: OneRDM, orbitals: OrbitalData) -> np.ndarray:
    gs = spin_summed_gamma(rdm1)
    C = orbitals.mo_coefficients
    if C.shape[1] != gs.shape[0]:
        raise ValueError("orbital set has %d MOs but the 1-RDM spans %d spatial "
                         "orbitals" % (C.shape[1], gs.shape[0]))
    return C @ gs @ C.T


def metallic_character(rdm1: OneRDM, orbitals: OrbitalData) -> float:
    """Sum of squared interatomic AO 1-RDM elements, unordered pairs once."""
    P = _ao_density(rdm1, orbitals)
    atoms = orbitals.ao_to_atom
    total = 0.0
    nao = P.shape[0]
    for mu in range(nao):
        for nu in range(mu + 1, nao):
            if atoms[mu] != atoms[nu]:
                total += P[mu, nu] ** 2
    return float(total)


def mulliken_charges(rdm1: OneRDM, orbitals: OrbitalData) -> np.ndarray:
    """Per-atom charge q_A = Z_A - sum_{mu in A} (P S)_mumu."""
    P = _ao_density(rdm1, orbitals)
    PS = P @ orbitals.ao_overlap
    pops = np.zeros(len(orbitals.atom_labels))
    np.add.at(pops, orbitals.ao_to_atom, np.diag(PS))
    return orbitals.nuclear_charges - pops


def one_body_expectation(rdm1: OneRDM, operator: np.ndarray,
                         orbitals: OrbitalData = None) -> float:
    """Tr(gamma O); the operator basis is inferred from its dimension.

    r x r means spin-orbital, norb x norb spatial (paired with the
    spin-summed 1-RDM), and nao x nao atomic-orbital (transformed through
    the given orbitals).  Passing orbitals declares AO intent, so when nao
    equals norb the AO reading wins.  Anything else is a basis mismatch.
    """
    O = np.asarray(operator, dtype=float)
    r = rdm1.r
    norb = r // 2
    if orbitals is not None and O.shape == (orbitals.n_ao, orbitals.n_ao):
        C = orbitals.mo_coefficients
        return float(np.tensordot(spin_summed_gamma(rdm1), C.T @ O @ C))
    if O.shape == (r, r):
        return float(np.tensordot(rdm1.gamma, O))
    if O.shape == (norb, norb):
        return float(np.tensordot(spin_summed_gamma(rdm1), O))
    raise ValueError("operator shape %s matches neither the spin-orbital, "
                     "spatial, nor AO dimension" % (O.shape,))


def dipole_moment(rdm1: OneRDM, orbitals: OrbitalData) -> dict:
    """Electronic plus nuclear dipole, components in debye.

    Electrons carry charge -1, so the total is (sum_A Z_A R_A - Tr(P D_x))
    per component, scaled by 2.541746 debye per atomic unit.
    """
    if orbitals.dipole_integrals is None:
        raise ValueError("orbital data carries no dipole integrals")
    electronic = np.array([one_body_expectation(rdm1, orbitals.dipole_integrals[x],
                                                orbitals) for x in range(3)])
    nuclear = orbitals.nuclear_charges @ orbitals.nuclear_coordinates
    total_au = nuclear - electronic
    total = total_au * DEBYE_PER_AU
    return {"components_debye": total,
            "magnitude_debye": float(np.linalg.norm(total)),
            "electronic_au": electronic,
            "nuclear_au": nuclear}


def two_body_expectation(rdm2: TwoRDM, operator) -> float:
    """Tr(D O) with the packing convention of the energy functional."""
    if isinstance(operator, PackedMatrix):
        return hermitian_inner_product(rdm2.matrix, operator)
    O = np.asarray(operator, dtype=float)
    d = rdm2.basis.dim
    if O.shape != (d, d):
        raise ValueError("packed operator shape %s does not match pair dimension %d"
                         % (O.shape, d))
    return float(np.tensordot(rdm2.matrix.m, O))


def bond_coherence(rdm1: OneRDM, periodic: bool = False) -> float:
    """Sum of squared nearest-neighbor spatial 1-RDM elements on a chain.

    The lattice analog of the interatomic squared-element sum: site order is
    the spatial-orbital order, bonds are (i, i+1) plus the wrap bond when
    periodic (suppressed for 2 sites, where the wrap duplicates the bond).
    """
    gs = spin_summed_gamma(rdm1)
    L = gs.shape[0]
    total = sum(gs[i, i + 1] ** 2 for i in range(L - 1))
    if periodic and L > 2:
        total += gs[L - 1, 0] ** 2
    return float(total)


# -- ORBDATA 1 text format ---------------------------------------------------

def write_orbital_data(orb: OrbitalData, target) -> str:
    """Serialize OrbitalData to the versioned plain-text format.

    Layout: "ORBDATA 1" header; atom lines (label, charge, xyz in bohr); AO
    count and per-AO atom indices; then named row-major matrix blocks
    (overlap, mo_coefficients, optional dipole_x/y/z).
    """
    lines = ["ORBDATA 1"]
    lines.append("natoms %d" % len(orb.atom_labels))
    for a, label in enumerate(orb.atom_labels):
        x, y, z = orb.nuclear_coordinates[a]
        lines.append("atom %s %.15g %.15g %.15g %.15g"
                     % (label, orb.nuclear_charges[a], x, y, z))
    lines.append("nao %d" % orb.n_ao)
    lines.append("nmo %d" % orb.n_mo)
    lines.append("ao_atoms " + " ".join(str(int(a)) for a in orb.ao_to_atom))

    def block(name, M):
        lines.append(name)
        for row in np.atleast_2d(M):
            lines.append(" ".join("%.15g" % v for v in row))

    block("overlap", orb.ao_overlap)
    block("mo_coefficients", orb.mo_coefficients)
    if orb.dipole_integrals is not None:
        for x, name in enumerate(("dipole_x", "dipole_y", "dipole_z")):
            block(name, orb.dipole_integrals[x])
    text = "\n".join(lines) + "\n"
    if hasattr(target, "write"):
        target.write(text)
    else:
        with open(target, "w") as fh:
            fh.write(text)
    return text


def load_orbital_data(source) -> OrbitalData:
    """Parse the ORBDATA 1 format; validation happens in the constructor."""
    if hasattr(source, "read"):
        text = source.read()
    elif isinstance(source, str) and "\n" in source:
        text = source
    else:
        with open(source) as fh:
            text = fh.read()
    lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
    if not lines or lines[0].split() != ["ORBDATA", "1"]:
        raise ValueError("not an ORBDATA 1 file (bad or missing header line)")
    pos = 1

    def expect(key):
        nonlocal pos
        if pos >= len(lines):
            raise ValueError("truncated file: expected '%s' after line %d" % (key, pos))
        fields = lines[pos].split()
        if fields[0] != key:
            raise ValueError("line %d: expected '%s', found %r" % (pos + 1, key, lines[pos]))
        pos += 1
        return fields[1:]

    natoms = int(expect("natoms")[0])
    labels, charges, coords = [], [], []
    for _ in range(natoms):
        f = expect("atom")
        labels.append(f[0])
        charges.append(float(f[1]))
        coords.append([float(v) for v in f[2:5]])
    nao = int(expect("nao")[0])
    nmo = int(expect("nmo")[0])
    ao_atoms = [int(v) for v in expect("ao_atoms")]

    def read_block(name, rows, cols):
        nonlocal pos
        expect(name)
        M = np.empty((rows, cols))
        for i in range(rows):
            if pos >= len(lines):
                raise ValueError("truncated %s block: %d of %d rows present"
                                 % (name, i, rows))
            vals = [float(v) for v in lines[pos].split()]
            if len(vals) != cols:
                raise ValueError("line %d: expected %d values, found %d"
                                 % (pos + 1, cols, len(vals)))
            M[i] = vals
            pos += 1
        return M

    S = read_block("overlap", nao, nao)
    C = read_block("mo_coefficients", nao, nmo)
    dip = None
    if pos < len(lines) and lines[pos].split()[0] == "dipole_x":
        dip = np.stack([read_block(name, nao, nao)
                        for name in ("dipole_x", "dipole_y", "dipole_z")])
    return OrbitalData(mo_coefficients=C, ao_overlap=S,
                       ao_to_atom=np.array(ao_atoms),
                       atom_labels=labels,
                       nuclear_charges=np.array(charges),
                       nuclear_coordinates=np.array(coords),
                       dipole_integrals=dip)
