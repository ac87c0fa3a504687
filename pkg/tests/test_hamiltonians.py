"""Integral handling: FCIDUMP io, model builders, reduced-operator assembly.

The load-bearing check is the pairing oracle: for any system whose exact
ground state is known, Tr(K D) + core must reproduce the ground energy,
which exercises spin interleaving, the antisymmetrized two-electron part,
and the one-body embedding in one shot.
"""
import io

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rdmcone import (IntegralSet, assemble_reduced_hamiltonian,
                     fci_ground_state, hermitian_inner_product, hubbard_chain,
                     parse_fcidump, spin_orbital_h, write_fcidump)


def random_integral_set(rng, norb, nelec):
    h = rng.standard_normal((norb, norb))
    h = 0.5 * (h + h.T)
    V = rng.standard_normal((norb,) * 4)
    # enforce the eightfold chemist symmetry by averaging
    perms = [(0, 1, 2, 3), (1, 0, 2, 3), (0, 1, 3, 2), (1, 0, 3, 2),
             (2, 3, 0, 1), (3, 2, 0, 1), (2, 3, 1, 0), (3, 2, 1, 0)]
    V = sum(V.transpose(p) for p in perms) / 8.0
    return IntegralSet(norb=norb, n_electrons=nelec, ms2=nelec % 2,
                       core_energy=float(rng.standard_normal()), h=h, V=V)


def test_hubbard_defaults_and_shapes():
    ints = hubbard_chain(4, 1.0, 2.0)
    assert ints.norb == 4
    assert ints.n_electrons == 4
    assert ints.ms2 == 0
    assert ints.h[0, 1] == pytest.approx(-1.0)
    assert ints.h[0, 3] == pytest.approx(0.0)
    assert ints.V[2, 2, 2, 2] == pytest.approx(2.0)
    assert ints.V[0, 1, 0, 1] == pytest.approx(0.0)


def test_hubbard_periodic_wrap():
    ring = hubbard_chain(4, 1.0, 0.0, periodic=True)
    assert ring.h[0, 3] == pytest.approx(-1.0)
    # two sites: the wrap bond would duplicate the existing one
    pair = hubbard_chain(2, 1.0, 0.0, periodic=True)
    assert pair.h[0, 1] == pytest.approx(-1.0)
    with pytest.raises(ValueError):
        hubbard_chain(1, 1.0, 0.0)


def test_integral_set_validation():
    rng = np.random.default_rng(0)
    good = random_integral_set(rng, 3, 2)
    h_bad = good.h.copy()
    h_bad[0, 1] += 1.0
    with pytest.raises(ValueError):
        IntegralSet(norb=3, n_electrons=2, ms2=0, core_energy=0.0,
                    h=h_bad, V=good.V)
    V_bad = good.V.copy()
    V_bad[0, 1, 2, 0] += 1.0
    with pytest.raises(ValueError):
        IntegralSet(norb=3, n_electrons=2, ms2=0, core_energy=0.0,
                    h=good.h, V=V_bad)


def test_with_electrons_changes_only_counts():
    ints = hubbard_chain(4, 1.0, 2.0)
    half = ints.with_electrons(2, ms2=0)
    assert half.n_electrons == 2
    assert half.ms2 == 0
    assert np.array_equal(half.h, ints.h)


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 2 ** 31 - 1), st.integers(2, 4))
def test_fcidump_round_trip(seed, norb):
    rng = np.random.default_rng(seed)
    ints = random_integral_set(rng, norb, 2)
    text = write_fcidump(ints)
    back = parse_fcidump(text)
    assert back.norb == ints.norb
    assert back.n_electrons == ints.n_electrons
    assert back.ms2 == ints.ms2
    assert back.core_energy == pytest.approx(ints.core_energy, abs=1e-12)
    assert np.allclose(back.h, ints.h, atol=1e-12)
    assert np.allclose(back.V, ints.V, atol=1e-12)


def test_parse_accepts_stream_and_fortran_exponents():
    text = ("&FCI NORB=2,NELEC=2,MS2=0,\n"
            " &END\n"
            " 1.5D0  1 1 1 1\n"
            " -2.0D-1  1 1 0 0\n"
            " 0.25  0 0 0 0\n")
    ints = parse_fcidump(io.StringIO(text))
    assert ints.V[0, 0, 0, 0] == pytest.approx(1.5)
    assert ints.h[0, 0] == pytest.approx(-0.2)
    assert ints.core_energy == pytest.approx(0.25)


def test_parse_errors_name_the_line():
    bad_value = "&FCI NORB=2,NELEC=2,MS2=0\n&END\n nonsense 1 1 1 1\n"
    with pytest.raises(ValueError, match="line 3"):
        parse_fcidump(bad_value)
    out_of_range = "&FCI NORB=2,NELEC=2,MS2=0\n&END\n 1.0 3 1 1 1\n"
    with pytest.raises(ValueError, match="line 3"):
        parse_fcidump(out_of_range)
    no_norb = "&FCI NELEC=2,MS2=0\n&END\n"
    with pytest.raises(ValueError):
        parse_fcidump(no_norb)


def test_spin_orbital_embedding_blocks():
    ints = hubbard_chain(3, 1.0, 0.0)
    hso = spin_orbital_h(ints)
    assert hso.shape == (6, 6)
    assert np.array_equal(hso[0::2, 0::2], ints.h)
    assert np.array_equal(hso[1::2, 1::2], ints.h)
    assert np.all(hso[0::2, 1::2] == 0.0)


def test_reduced_operator_pairing_oracle_hubbard(l2u4, l4u4):
    for ints, res, red in (l2u4, l4u4):
        e = hermitian_inner_product(red.K, res.rdm2.matrix) + ints.core_energy
        assert e == pytest.approx(res.energy, abs=1e-10)


def test_reduced_operator_pairing_oracle_molecule(h2_fixture):
    ints, res, red = h2_fixture
    e = hermitian_inner_product(red.K, res.rdm2.matrix) + ints.core_energy
    assert e == pytest.approx(res.energy, abs=1e-10)


def test_two_site_analytic_energy():
    # half-filled two-site chain: E = U/2 - sqrt((U/2)^2 + 4 t^2)
    for U in (0.0, 1.0, 4.0, 8.0):
        ints = hubbard_chain(2, 1.0, U)
        got = fci_ground_state(ints).energy
        want = U / 2.0 - np.sqrt((U / 2.0) ** 2 + 4.0)
        assert got == pytest.approx(want, abs=1e-10)


def test_assembly_guards():
    ints = hubbard_chain(2, 1.0, 4.0)
    with pytest.raises(ValueError):
        assemble_reduced_hamiltonian(ints, 1)
    with pytest.raises(ValueError):
        assemble_reduced_hamiltonian(ints, 5)


def test_pair_trace_matches_particle_count():
    ints = hubbard_chain(3, 1.0, 2.0)
    red = assemble_reduced_hamiltonian(ints, 3)
    assert red.pair_trace == pytest.approx(3.0)
