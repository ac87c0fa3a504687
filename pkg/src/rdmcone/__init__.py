"""Variational lower bounds on many-fermion ground-state energies.

The package minimizes the energy over two-particle reduced density matrices
constrained by representability cones (particle-particle, hole-hole,
particle-hole, and pair-creation-annihilation positivity), with a matching
dual formulation whose Lagrange multiplier recovers the 2-RDM. A full
configuration-interaction oracle for small systems backs every claimed bound.
"""

from ._kernels import backend_name, have_extension
from .dual import (DualCertificate, DualProblem, MultiplierRDM, WarmStart,
                   hellmann_feynman_check, rigorous_bound, solve_dual)
from .fci import (DeterminantBasis, FCIResult, apply_operator_string,
                  determinant_basis, fci_ground_state)
from .hamiltonians import (IntegralSet, ReducedHamiltonian,
                           assemble_reduced_hamiltonian, hubbard_chain,
                           parse_fcidump, spin_orbital_h, write_fcidump)
from .nrep import (DualConeElement, OneRDM, T2FactorCoefficients, TwoRDM,
                   contract_to_1rdm, dq_dual_elements, lift_G2, lift_Q2,
                   t2_dual_element)
from .pairspace import (PackedMatrix, PairBasis, Spectrum, eigendecompose,
                        hermitian_inner_product, psd_project)
from .primal import (PrimalProblem, SolveReport, check_feasibility,
                     solve_primal)
from .properties import (NaturalOrbitalReport, OrbitalData, bond_coherence,
                         dipole_moment, load_orbital_data, metallic_character,
                         mulliken_charges, natural_orbitals,
                         one_body_expectation, spin_summed_gamma,
                         two_body_expectation, von_neumann_entropy,
                         write_orbital_data)

__version__ = "0.1.0"

__all__ = [
    "DeterminantBasis", "DualCertificate", "DualConeElement", "DualProblem",
    "FCIResult", "IntegralSet", "MultiplierRDM", "NaturalOrbitalReport",
    "OneRDM", "OrbitalData", "PackedMatrix", "PairBasis", "PrimalProblem",
    "ReducedHamiltonian", "SolveReport", "Spectrum", "T2FactorCoefficients",
    "TwoRDM", "WarmStart", "apply_operator_string",
    "assemble_reduced_hamiltonian", "backend_name", "bond_coherence",
    "check_feasibility", "contract_to_1rdm", "determinant_basis",
    "dipole_moment", "dq_dual_elements", "eigendecompose", "fci_ground_state",
    "have_extension", "hellmann_feynman_check", "hermitian_inner_product",
    "hubbard_chain", "lift_G2", "lift_Q2", "load_orbital_data",
    "metallic_character", "mulliken_charges", "natural_orbitals",
    "one_body_expectation", "parse_fcidump", "psd_project", "rigorous_bound",
    "solve_dual", "solve_primal", "spin_orbital_h", "spin_summed_gamma",
    "t2_dual_element", "two_body_expectation", "von_neumann_entropy",
    "write_fcidump", "write_orbital_data",
]
