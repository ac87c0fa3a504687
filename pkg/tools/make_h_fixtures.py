"""Generate the bundled hydrogen-chain fixtures.

Linear H chains in a minimal basis of contracted s-type Gaussians (three
primitives per atom, exponents scaled for an effective 1s with zeta = 1.24).
For s functions every integral has a closed form, so no quadrature or
external quantum-chemistry dependency is needed.  A small restricted
Hartree-Fock loop supplies molecular orbitals; the MO-basis integrals go
out as FCIDUMP files and the AO-level data (overlap, coefficients, atom
map, dipole integrals) as orbital-data sidecars.

Run from the repository root:

    python3 tools/make_h_fixtures.py            # write tests/fixtures/*
    python3 tools/make_h_fixtures.py --scan     # spacing survey for H4
"""
import argparse
import os
import sys

import numpy as np
from scipy.special import erf

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from rdmcone import (IntegralSet, OrbitalData, write_fcidump,
                     write_orbital_data)

# three-primitive fit to a 1s Slater function, scaled by zeta**2 = 1.24**2
ZETA = 1.24
EXPONENTS = np.array([2.227660584, 0.405771156, 0.109818]) * ZETA**2
WEIGHTS = np.array([0.154328967, 0.535328142, 0.444634542])


def _boys0(t):
    t = np.asarray(t, dtype=float)
    small = t < 1e-12
    safe = np.where(small, 1.0, t)
    out = 0.5 * np.sqrt(np.pi / safe) * erf(np.sqrt(safe))
    return np.where(small, 1.0 - t / 3.0, out)


def _primitive_norms(alphas):
    return (2.0 * alphas / np.pi) ** 0.75


def h_chain_integrals(centers):
    """AO integrals for one contracted s function per center.

    Returns (S, T, Vne, dip, eri) where dip has shape (3, n, n) and eri is
    in chemist convention (ab|cd).
    """
    centers = np.asarray(centers, dtype=float)
    n = len(centers)
    norm = _primitive_norms(EXPONENTS)
    coeff = WEIGHTS * norm

    S = np.zeros((n, n))
    T = np.zeros((n, n))
    V = np.zeros((n, n))
    dip = np.zeros((3, n, n))
    for a in range(n):
        for b in range(n):
            Ra, Rb = centers[a], centers[b]
            r2 = float(np.dot(Ra - Rb, Ra - Rb))
            for i, al in enumerate(EXPONENTS):
                for j, be in enumerate(EXPONENTS):
                    p = al + be
                    mu = al * be / p
                    pref = coeff[i] * coeff[j] * (np.pi / p) ** 1.5 * np.exp(-mu * r2)
                    S[a, b] += pref
                    T[a, b] += pref * mu * (3.0 - 2.0 * mu * r2)
                    P = (al * Ra + be * Rb) / p
                    dip[:, a, b] += pref * P
                    for Rc in centers:
                        t = p * float(np.dot(P - Rc, P - Rc))
                        V[a, b] -= (coeff[i] * coeff[j] * 2.0 * np.pi / p
                                    * np.exp(-mu * r2) * float(_boys0(t)))

    eri = np.zeros((n, n, n, n))
    for a in range(n):
        for b in range(n):
            Rab2 = float(np.dot(centers[a] - centers[b], centers[a] - centers[b]))
            for c in range(n):
                for d_ in range(n):
                    Rcd2 = float(np.dot(centers[c] - centers[d_],
                                        centers[c] - centers[d_]))
                    val = 0.0
                    for i, al in enumerate(EXPONENTS):
                        for j, be in enumerate(EXPONENTS):
                            p = al + be
                            P = (al * centers[a] + be * centers[b]) / p
                            ka = np.exp(-al * be / p * Rab2)
                            for k, ga in enumerate(EXPONENTS):
                                for l, de in enumerate(EXPONENTS):
                                    q = ga + de
                                    Q = (ga * centers[c] + de * centers[d_]) / q
                                    kb = np.exp(-ga * de / q * Rcd2)
                                    t = (p * q / (p + q)
                                         * float(np.dot(P - Q, P - Q)))
                                    val += (coeff[i] * coeff[j] * coeff[k]
                                            * coeff[l] * ka * kb
                                            * 2.0 * np.pi ** 2.5
                                            / (p * q * np.sqrt(p + q))
                                            * float(_boys0(t)))
                    eri[a, b, c, d_] = val
    return S, T, V, dip, eri


def nuclear_repulsion(centers, charges):
    e = 0.0
    for a in range(len(centers)):
        for b in range(a + 1, len(centers)):
            e += charges[a] * charges[b] / np.linalg.norm(centers[a] - centers[b])
    return e


def restricted_hartree_fock(S, hcore, eri, n_electrons, max_cycles=200,
                            tol=1e-12):
    """Closed-shell SCF; returns (electronic energy, MO coefficients)."""
    vals, vecs = np.linalg.eigh(S)
    X = vecs @ np.diag(vals ** -0.5) @ vecs.T
    nocc = n_electrons // 2
    F = hcore
    energy = 0.0
    C = None
    for _ in range(max_cycles):
        Fp = X.T @ F @ X
        _, Cp = np.linalg.eigh(Fp)
        C = X @ Cp
        Cocc = C[:, :nocc]
        P = 2.0 * Cocc @ Cocc.T
        J = np.einsum("abcd,dc->ab", eri, P.T)
        K = np.einsum("acbd,dc->ab", eri, P.T)
        F = hcore + J - 0.5 * K
        new_energy = 0.5 * np.sum(P * (hcore + F))
        if abs(new_energy - energy) < tol:
            energy = new_energy
            break
        energy = new_energy
    return energy, C


def mo_integral_set(centers, n_electrons):
    centers = np.asarray(centers, dtype=float)
    S, T, V, dip, eri = h_chain_integrals(centers)
    hcore = T + V
    e_hf, C = restricted_hartree_fock(S, hcore, eri, n_electrons)
    h_mo = C.T @ hcore @ C
    eri_mo = np.einsum("abcd,ap,bq,cr,ds->pqrs", eri, C, C, C, C, optimize=True)
    charges = np.ones(len(centers))
    core = nuclear_repulsion(centers, charges)
    ints = IntegralSet(norb=len(centers), n_electrons=n_electrons, ms2=0,
                       core_energy=core, h=h_mo, V=eri_mo)
    orb = OrbitalData(mo_coefficients=C,
                      ao_overlap=S,
                      ao_to_atom=np.arange(len(centers)),
                      atom_labels=["H"] * len(centers),
                      nuclear_charges=charges,
                      nuclear_coordinates=centers,
                      dipole_integrals=dip)
    return ints, orb, e_hf + core


def check_h2_reference():
    """Validate against the standard minimal-basis H2 values at R = 1.4."""
    centers = np.array([[0.0, 0.0, 0.0], [0.0, 0.0, 1.4]])
    S, T, V, _, eri = h_chain_integrals(centers)
    checks = [
        ("S12", S[0, 1], 0.6593),
        ("T11", T[0, 0], 0.7600),
        ("h11", (T + V)[0, 0], -1.1204),
        ("h12", (T + V)[0, 1], -0.9584),
        ("(11|11)", eri[0, 0, 0, 0], 0.7746),
        ("(11|22)", eri[0, 0, 1, 1], 0.5697),
        ("(12|12)", eri[0, 1, 0, 1], 0.2970),
        ("(11|12)", eri[0, 0, 0, 1], 0.4438),
    ]
    ok = True
    for name, got, want in checks:
        good = abs(got - want) < 5e-4
        ok = ok and good
        print("  %-9s %+.4f  (reference %+.4f)  %s"
              % (name, got, want, "ok" if good else "MISMATCH"))
    ints, _, e_total = mo_integral_set(centers, 2)
    print("  E_HF      %+.4f  (reference -1.1167)  %s"
          % (e_total, "ok" if abs(e_total + 1.1167) < 5e-4 else "MISMATCH"))
    if not ok:
        raise SystemExit("H2 reference integrals do not match")
    return ints


def spacing_scan():
    from rdmcone import (DualProblem, PrimalProblem,
                         assemble_reduced_hamiltonian, fci_ground_state,
                         solve_dual, solve_primal)
    z = np.zeros(2)
    for a in (1.4, 1.6, 1.8, 2.0):
        centers = np.array([np.concatenate((z, [k * a])) for k in range(4)])
        ints, _, _ = mo_integral_set(centers, 4)
        e_fci = fci_ground_state(ints).energy
        red = assemble_reduced_hamiltonian(ints, 4)
        rep = solve_primal(PrimalProblem(red), tol=1e-7)
        cert, _, _ = solve_dual(DualProblem(red, n_g=red.r, n_t2=red.r),
                                tol=1e-8, max_outer=60)
        e_dqg = rep.energy
        e_t2 = cert.rigorous_bound
        print("a=%.2f  E_FCI %+0.8f  DQG err %8.2e  DQGT err %8.2e  ratio %5.1f"
              % (a, e_fci, e_fci - e_dqg, e_fci - e_t2,
                 (e_fci - e_dqg) / max(e_fci - e_t2, 1e-16)))


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--scan", action="store_true",
                        help="survey H4 spacings instead of writing fixtures")
    parser.add_argument("--spacing", type=float, default=1.8,
                        help="H4 nearest-neighbor distance in bohr")
    args = parser.parse_args()

    print("H2 reference check (R = 1.4 bohr):")
    h2_ints = check_h2_reference()

    if args.scan:
        spacing_scan()
        return

    fixdir = os.path.join(os.path.dirname(__file__), "..", "tests", "fixtures")
    os.makedirs(fixdir, exist_ok=True)

    centers2 = np.array([[0.0, 0.0, 0.0], [0.0, 0.0, 1.4]])
    _, orb2, _ = mo_integral_set(centers2, 2)
    write_fcidump(h2_ints, os.path.join(fixdir, "h2_sto3g.fcidump"))
    write_orbital_data(orb2, os.path.join(fixdir, "h2_sto3g.orbdata"))

    a = args.spacing
    centers4 = np.array([[0.0, 0.0, k * a] for k in range(4)])
    ints4, orb4, _ = mo_integral_set(centers4, 4)
    write_fcidump(ints4, os.path.join(fixdir, "h4_sto3g.fcidump"))
    write_orbital_data(orb4, os.path.join(fixdir, "h4_sto3g.orbdata"))
    print("wrote fixtures to %s (H4 spacing %.2f bohr)" % (fixdir, a))


if __name__ == "__main__":
    main()
