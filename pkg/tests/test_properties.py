"""Density-derived observables and the orbital-data sidecar format."""
import os

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import fixture_path
from rdmcone import (OneRDM, OrbitalData, bond_coherence, contract_to_1rdm,
                     dipole_moment, load_orbital_data, metallic_character,
                     mulliken_charges, natural_orbitals, one_body_expectation,
                     spin_summed_gamma, two_body_expectation,
                     von_neumann_entropy, write_orbital_data)


def random_orbital_data(rng, nao, with_dipole=False):
    """Random geometry and a random orthonormal MO set for a random metric."""
    A = rng.standard_normal((nao, nao))
    S = A @ A.T + nao * np.eye(nao)
    vals, vecs = np.linalg.eigh(S)
    S_half_inv = vecs @ np.diag(vals ** -0.5) @ vecs.T
    O, _ = np.linalg.qr(rng.standard_normal((nao, nao)))
    C = S_half_inv @ O
    dip = None
    if with_dipole:
        dip = rng.standard_normal((3, nao, nao))
        dip = 0.5 * (dip + dip.transpose(0, 2, 1))
    return OrbitalData(
        mo_coefficients=C, ao_overlap=S,
        ao_to_atom=np.array([i % 2 for i in range(nao)]),
        atom_labels=["A", "B"],
        nuclear_charges=rng.integers(1, 5, size=2).astype(float),
        nuclear_coordinates=rng.standard_normal((2, 3)),
        dipole_integrals=dip)


def test_entropy_exactly_zero_for_idempotent():
    occ = np.array([1.0, 1.0, 0.0, 0.0])
    s = von_neumann_entropy(occ)
    assert s == 0.0
    assert str(s) == "0.0"  # not -0.0


def test_entropy_peak_and_clip():
    assert von_neumann_entropy(np.array([0.5, 0.5])) == pytest.approx(
        np.log(2.0), abs=1e-12)
    # tiny overshoot from numerics is clipped, genuine violations raise
    assert von_neumann_entropy(np.array([1.0 + 1e-10])) == pytest.approx(0.0)
    with pytest.raises(ValueError):
        von_neumann_entropy(np.array([-0.2]))
    # occupations up to the stated cap are allowed when the cap says so
    assert von_neumann_entropy(np.array([2.0]), cap=2.0) == 0.0


@settings(max_examples=40, deadline=None)
@given(st.lists(st.floats(0.0, 1.0), min_size=1, max_size=10))
def test_entropy_nonnegative(occs):
    assert von_neumann_entropy(np.array(occs)) >= 0.0


def test_spin_summed_gamma_blocks():
    g = np.zeros((4, 4))
    g[0, 0], g[1, 1], g[2, 2] = 0.9, 0.8, 0.3
    g[0, 2] = g[2, 0] = 0.1
    out = spin_summed_gamma(OneRDM(g, 2))
    assert out.shape == (2, 2)
    assert out[0, 0] == pytest.approx(1.7)
    assert out[1, 1] == pytest.approx(0.3)
    assert out[0, 1] == pytest.approx(0.1)
    with pytest.raises(ValueError):
        spin_summed_gamma(OneRDM(np.eye(3), 2))


def test_natural_orbitals_of_ground_state(l4u4):
    _, res, _ = l4u4
    rep = natural_orbitals(res.rdm1)
    assert rep.spin_summed
    assert rep.cap == 2.0
    assert np.sum(rep.occupations) == pytest.approx(4.0, abs=1e-6)
    assert rep.occupations.min() >= 0.0
    assert rep.occupations.max() <= 2.0
    assert np.all(np.diff(rep.occupations) <= 1e-12)
    # rotation actually diagonalizes the spin-summed density
    g = spin_summed_gamma(res.rdm1)
    recon = rep.rotation @ np.diag(rep.raw_occupations) @ rep.rotation.T
    assert np.allclose(recon, g, atol=1e-10)
    assert rep.entropy > 0.0


def test_natural_orbitals_spin_orbital_mode(l4u4):
    _, res, _ = l4u4
    rep = natural_orbitals(res.rdm1, spin_summed=False)
    assert rep.cap == 1.0
    assert np.sum(rep.occupations) == pytest.approx(4.0, abs=1e-6)
    assert rep.occupations.max() <= 1.0 + 1e-12


def test_mulliken_charges_sum_to_total_charge(l4u4):
    _, res, _ = l4u4
    rng = np.random.default_rng(3)
    for trial in range(5):
        orb = random_orbital_data(rng, nao=4)
        q = mulliken_charges(res.rdm1, orb)
        assert q.shape == (2,)
        want = float(np.sum(orb.nuclear_charges)) - 4.0
        assert np.sum(q) == pytest.approx(want, abs=1e-10)


def test_orbital_data_validation():
    rng = np.random.default_rng(4)
    orb = random_orbital_data(rng, 4)
    # breaking orthonormality must be caught
    bad_C = orb.mo_coefficients.copy()
    bad_C[0, 0] += 0.1
    with pytest.raises(ValueError):
        OrbitalData(mo_coefficients=bad_C, ao_overlap=orb.ao_overlap,
                    ao_to_atom=orb.ao_to_atom, atom_labels=orb.atom_labels,
                    nuclear_charges=orb.nuclear_charges,
                    nuclear_coordinates=orb.nuclear_coordinates)
    with pytest.raises(ValueError):
        OrbitalData(mo_coefficients=orb.mo_coefficients,
                    ao_overlap=orb.ao_overlap,
                    ao_to_atom=np.array([0, 1, 2, 5]),  # atom index out of range
                    atom_labels=orb.atom_labels,
                    nuclear_charges=orb.nuclear_charges,
                    nuclear_coordinates=orb.nuclear_coordinates)


def test_metallic_character_rotation_invariance(l4u4):
    _, res, _ = l4u4
    rng = np.random.default_rng(5)
    orb = random_orbital_data(rng, 4)
    base = metallic_character(res.rdm1, orb)
    O, _ = np.linalg.qr(rng.standard_normal((4, 4)))
    # rotate the spin-orbital density with the spin-lifted rotation and the
    # orbitals with the spatial one; the AO-level quantity cannot move
    Ospin = np.kron(O, np.eye(2))
    g_rot = Ospin.T @ res.rdm1.gamma @ Ospin
    orb_rot = OrbitalData(mo_coefficients=orb.mo_coefficients @ O,
                          ao_overlap=orb.ao_overlap,
                          ao_to_atom=orb.ao_to_atom,
                          atom_labels=orb.atom_labels,
                          nuclear_charges=orb.nuclear_charges,
                          nuclear_coordinates=orb.nuclear_coordinates)
    rotated = metallic_character(OneRDM(g_rot, 4), orb_rot)
    assert rotated == pytest.approx(base, abs=1e-9)


def test_dipole_vanishes_for_symmetric_molecule(h2_fixture):
    _, res, _ = h2_fixture
    orb = load_orbital_data(fixture_path("h2_sto3g.orbdata"))
    out = dipole_moment(res.rdm1, orb)
    assert out["magnitude_debye"] == pytest.approx(0.0, abs=1e-8)
    assert len(out["components_debye"]) == 3


def test_dipole_requires_integrals(l4u4):
    _, res, _ = l4u4
    orb = random_orbital_data(np.random.default_rng(6), 4, with_dipole=False)
    with pytest.raises(ValueError):
        dipole_moment(res.rdm1, orb)


def test_one_body_expectation_dispatch(l4u4):
    ints, res, _ = l4u4
    rng = np.random.default_rng(7)
    # spin-orbital operator: direct pairing
    op_so = rng.standard_normal((8, 8))
    op_so = 0.5 * (op_so + op_so.T)
    direct = float(np.tensordot(op_so, res.rdm1.gamma))
    assert one_body_expectation(res.rdm1, op_so) == pytest.approx(direct,
                                                                  abs=1e-12)
    # spatial operator pairs with the spin-summed density
    op_sp = rng.standard_normal((4, 4))
    op_sp = 0.5 * (op_sp + op_sp.T)
    want = float(np.tensordot(op_sp, spin_summed_gamma(res.rdm1)))
    assert one_body_expectation(res.rdm1, op_sp) == pytest.approx(want,
                                                                  abs=1e-12)
    # particle number via the identity
    assert one_body_expectation(res.rdm1, np.eye(8)) == pytest.approx(4.0,
                                                                      abs=1e-9)
    with pytest.raises(ValueError):
        one_body_expectation(res.rdm1, np.eye(5))


def test_one_body_expectation_is_linear(l4u4):
    _, res, _ = l4u4
    rng = np.random.default_rng(8)
    A = rng.standard_normal((8, 8))
    B = rng.standard_normal((8, 8))
    lhs = one_body_expectation(res.rdm1, 2.0 * A + B)
    rhs = (2.0 * one_body_expectation(res.rdm1, A)
           + one_body_expectation(res.rdm1, B))
    assert lhs == pytest.approx(rhs, abs=1e-10)


def test_two_body_expectation_recovers_energy(l4u4):
    ints, res, red = l4u4
    got = two_body_expectation(res.rdm2, red.K) + ints.core_energy
    assert got == pytest.approx(res.energy, abs=1e-10)
    raw = two_body_expectation(res.rdm2, red.K.m)
    assert raw == pytest.approx(got - ints.core_energy, abs=1e-12)
    with pytest.raises(ValueError):
        two_body_expectation(res.rdm2, np.eye(3))


def test_bond_coherence_positive_and_wrap(l4u0):
    _, res, _ = l4u0
    open_chain = bond_coherence(res.rdm1)
    assert open_chain > 0.0
    # the wrap bond can only add weight
    ring = bond_coherence(res.rdm1, periodic=True)
    assert ring >= open_chain


def test_orbdata_round_trip(tmp_path):
    rng = np.random.default_rng(9)
    orb = random_orbital_data(rng, 4, with_dipole=True)
    path = str(tmp_path / "case.orbdata")
    write_orbital_data(orb, path)
    back = load_orbital_data(path)
    assert np.allclose(back.mo_coefficients, orb.mo_coefficients, atol=1e-12)
    assert np.allclose(back.ao_overlap, orb.ao_overlap, atol=1e-12)
    assert np.array_equal(back.ao_to_atom, orb.ao_to_atom)
    assert back.atom_labels == orb.atom_labels
    assert np.allclose(back.nuclear_coordinates, orb.nuclear_coordinates,
                       atol=1e-12)
    assert np.allclose(back.dipole_integrals, orb.dipole_integrals,
                       atol=1e-12)


def test_orbdata_parser_errors(tmp_path):
    bad = tmp_path / "bad.orbdata"
    bad.write_text("ORBDATA 9\n")
    with pytest.raises(ValueError, match="ORBDATA"):
        load_orbital_data(str(bad))
    truncated = tmp_path / "trunc.orbdata"
    truncated.write_text("ORBDATA 1\nnatoms 1\natom H 1 0 0 0\nnao 2\nnmo 2\n"
                         "ao_atoms 0 0\noverlap\n1 0\n")
    with pytest.raises(ValueError, match="truncated"):
        load_orbital_data(str(truncated))
