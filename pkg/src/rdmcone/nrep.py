"""Representability structure: RDM containers, lifting maps, dual-cone elements.

The 2-RDM lives on the packed pair space.  Three linear images of it are
constrained to be positive semidefinite: the 2-RDM itself, the two-hole
matrix Q, and the particle-hole matrix G.  Dually, cone elements B pair with
the 2-RDM from below; rank-one factors of each cone pull back to packed
matrices, and the pair-creation-annihilation (T2) family tightens the bound
past DQG.

Raw-array maps (lower-case names) operate on plain ndarrays and are what the
solvers call in hot loops; the upper-case ops wrap them in the dataclasses.
All adjoint pairs are tested against their definitions, and every lift is
pinned to a Fock-space oracle in the test suite.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .pairspace import PairBasis, PackedMatrix

COEFF_NORM_TOL = 1e-8


@dataclass
class OneRDM:
    """Spin-orbital one-particle density matrix <a_i+ a_k>."""

    gamma: np.ndarray
    N: int

    def __post_init__(self):
        self.gamma = np.asarray(self.gamma, dtype=float)
        r = self.gamma.shape[0]
        if self.gamma.shape != (r, r):
            raise ValueError("1-RDM must be square, got %s" % (self.gamma.shape,))

    @property
    def r(self):
        return self.gamma.shape[0]

    def trace(self) -> float:
        return float(np.trace(self.gamma))

    def occupations(self) -> np.ndarray:
        """Natural spin-orbital occupations, nonincreasing."""
        return np.linalg.eigvalsh(self.gamma)[::-1].copy()


@dataclass
class TwoRDM:
    """Packed two-particle density matrix with its particle number."""

    matrix: PackedMatrix
    N: int

    def __post_init__(self):
        # N=1 is allowed (its only valid 2-RDM is zero); contraction and the
        # lifts reject it separately where they divide by N-1
        if self.N < 1:
            raise ValueError("2-RDM needs N >= 1, got N=%d" % self.N)

    @property
    def basis(self) -> PairBasis:
        return self.matrix.basis

    @property
    def pair_trace(self) -> float:
        return self.N * (self.N - 1) / 2.0

    def trace(self) -> float:
        return self.matrix.trace()


@dataclass
class T2FactorCoefficients:
    """Packed coefficients c[(jk), l] of a pair-creation-annihilation factor.

    The factor operator is sum_{j<k,l} c[(jk),l] a_j+ a_k+ a_l; coefficients
    are kept unit-norm so factor magnitudes live in the solver weights.
    """

    c: np.ndarray
    basis: PairBasis

    def __post_init__(self):
        self.c = np.asarray(self.c, dtype=float)
        want = (self.basis.dim, self.basis.r)
        if self.c.shape != want:
            raise ValueError("coefficient shape %s, expected %s" % (self.c.shape, want))
        nrm = float(np.linalg.norm(self.c))
        if abs(nrm - 1.0) > COEFF_NORM_TOL:
            raise ValueError("coefficients must be unit-norm, got ||c|| = %.6g" % nrm)

    @classmethod
    def normalized(cls, c: np.ndarray, basis: PairBasis) -> "T2FactorCoefficients":
        c = np.asarray(c, dtype=float)
        nrm = np.linalg.norm(c)
        if nrm == 0.0:
            raise ValueError("zero coefficient tensor cannot be normalized")
        return cls(c / nrm, basis)


@dataclass
class DualConeElement:
    """Packed matrix B that pairs with any representable 2-RDM from below."""

    B: PackedMatrix
    kind: str
    provenance: object = None


# -- raw-array maps ---------------------------------------------------------

def contract_gamma(D: np.ndarray, basis: PairBasis, N: int) -> np.ndarray:
    """1-RDM from a packed 2-RDM: gamma_ik = sum_j Dtilde[i,j,k,j] / (N-1)."""
    T = basis.to_full(D)
    return np.einsum("ijkj->ik", T) / (N - 1)


def gamma_adjoint(g: np.ndarray, basis: PairBasis, N: int) -> np.ndarray:
    """Adjoint of contract_gamma as a map from r x r symmetric to packed."""
    W = np.einsum("ik,jl->ijkl", g, np.eye(basis.r)) / (N - 1)
    Z = basis.functional_to_packed(W)
    return 0.5 * (Z + Z.T)


def lambda_q(g: np.ndarray, basis: PairBasis) -> np.ndarray:
    """Packed matrix of the gamma-dependent part of the two-hole lift."""
    W = -np.einsum("ik,jl->ijkl", g, np.eye(basis.r))
    return basis.functional_to_packed(W)


def lambda_q_adjoint(Y: np.ndarray, basis: PairBasis) -> np.ndarray:
    return -np.einsum("ijkj->ik", basis.to_full(Y))


def lift_q2_linear(D: np.ndarray, basis: PairBasis, N: int) -> np.ndarray:
    """Linear part of the two-hole lift: L_Q(D) = D + Lambda_q(gamma(D)).

    The full two-hole matrix is Q = I + L_Q(D).
    """
    return D + lambda_q(contract_gamma(D, basis, N), basis)


def lift_q2_linear_adjoint(Y: np.ndarray, basis: PairBasis, N: int) -> np.ndarray:
    return Y + gamma_adjoint(lambda_q_adjoint(Y, basis), basis, N)


def lift_g2_raw(D: np.ndarray, basis: PairBasis, N: int) -> np.ndarray:
    """Particle-hole matrix on ordered pairs: G[(ij),(kl)] = d_jl gamma_ik
    - Dtilde[i,l,k,j], returned as an (r^2, r^2) matrix with row index i*r+j."""
    r = basis.r
    T = basis.to_full(D)
    g = np.einsum("ijkj->ik", T) / (N - 1)
    G = np.einsum("ik,jl->ijkl", g, np.eye(r)) - T.transpose(0, 3, 2, 1)
    return G.reshape(r * r, r * r)


def lift_g2_adjoint(Y: np.ndarray, basis: PairBasis, N: int) -> np.ndarray:
    r = basis.r
    Y4 = Y.reshape(r, r, r, r)
    Z1 = gamma_adjoint(np.einsum("ijkj->ik", Y4), basis, N)
    Z2 = basis.functional_to_packed(-Y4.transpose(0, 3, 2, 1))
    return Z1 + 0.5 * (Z2 + Z2.T)


def c_stack_full(Cp: np.ndarray, basis: PairBasis) -> np.ndarray:
    """Packed factor stack (nf, d, r) -> full antisymmetric (nf, r, r, r).

    The half weight keeps the convention that the operator is summed over
    packed pairs i < j only: contracting the full array over all ordered
    pairs then reproduces exactly that packed sum.
    """
    nf = Cp.shape[0]
    r = basis.r
    C = np.zeros((nf, r, r, r))
    C[:, basis.pi, basis.pj, :] = 0.5 * Cp
    C[:, basis.pj, basis.pi, :] = -0.5 * Cp
    return C


def t2_sum(Cp: np.ndarray, basis: PairBasis, N: int):
    """Summed packed pair-creation-annihilation element over a factor stack.

    Returns (B, C_full) with B symmetric packed and C_full the antisymmetric
    expansion reused by the gradient.
    """
    r = basis.r
    C = c_stack_full(Cp, basis)
    W = np.einsum("fjkp,flmp->jklm", C, C)
    W -= 4.0 * np.einsum("fpkl,fpmj->jklm", C, C)
    S = np.einsum("fpql,fpqj->jl", C, C)
    W += (2.0 / (N - 1)) * np.einsum("jl,km->jklm", S, np.eye(r))
    B = basis.functional_to_packed(W)
    return 0.5 * (B + B.T), C


def t2_pair_gradient(C_full: np.ndarray, X_full: np.ndarray, basis: PairBasis,
                     N: int) -> np.ndarray:
    """Gradient of <B(c), X> in the packed coefficients, per factor."""
    G = 2.0 * np.einsum("ablm,flmd->fabd", X_full, C_full)
    G -= 8.0 * np.einsum("fakl,dklb->fabd", C_full, X_full)
    T1 = np.einsum("jklk->jl", X_full)
    T1 = 0.5 * (T1 + T1.T)
    G += (4.0 / (N - 1)) * np.einsum("dj,fabj->fabd", T1, C_full)
    # chain rule through the half-weighted antisymmetric expansion
    return 0.5 * (G[:, basis.pi, basis.pj, :] - G[:, basis.pj, basis.pi, :])


# -- dataclass-level operations --------------------------------------------

def contract_to_1rdm(rdm: TwoRDM) -> OneRDM:
    """Partial trace of the 2-RDM down to the 1-RDM."""
    if rdm.N < 2:
        raise ValueError("contraction needs N >= 2, got N=%d" % rdm.N)
    return OneRDM(contract_gamma(rdm.matrix.m, rdm.basis, rdm.N), rdm.N)


def lift_Q2(rdm: TwoRDM) -> PackedMatrix:
    """Two-hole matrix Q = I + D + Lambda_q(gamma); equals <a_i a_j a_l+ a_k+>."""
    b = rdm.basis
    m = lift_q2_linear(rdm.matrix.m, b, rdm.N) + np.eye(b.dim)
    return PackedMatrix(b, m)


def lift_G2(rdm: TwoRDM) -> np.ndarray:
    """Particle-hole matrix <a_i+ a_j a_l+ a_k> on ordered pairs (r^2, r^2)."""
    return lift_g2_raw(rdm.matrix.m, rdm.basis, rdm.N)


def t2_dual_element(coeffs, N: int, basis: PairBasis = None) -> DualConeElement:
    """Dual-cone element of one pair-creation-annihilation factor.

    Pairing identity: Tr(B D) = <psi| C C^T + C^T C |psi> for any N-particle
    state psi with 2-RDM D, where C = sum c[(jk),l] a_j+ a_k+ a_l.  The
    contraction term carries 1/(N-1), so N=1 is rejected.
    """
    if N < 2:
        raise ValueError("pair-creation-annihilation element needs N >= 2")
    if isinstance(coeffs, T2FactorCoefficients):
        c, basis = coeffs.c, coeffs.basis
    else:
        if basis is None:
            raise ValueError("raw coefficient array needs an explicit basis")
        c = np.asarray(coeffs, dtype=float)
    B, _ = t2_sum(c[None, :, :], basis, N)
    return DualConeElement(PackedMatrix(basis, B), "T2", provenance=coeffs)


def dq_dual_elements(factors, basis: PairBasis, N: int):
    """Dual-cone elements for D2/Q2/G2 factors.

    Each factor is a (kind, payload) pair; payload is either a vector v
    (rank-one P = v v^T) or a PSD matrix on the cone's own index space.
    The Q2 pullback of P is L_Q^t(P) + (tr P / w) I, exact on the
    Tr D = w = N(N-1)/2 slice where the solvers operate.
    """
    if N < 2:
        raise ValueError("dual elements need N >= 2, got N=%d" % N)
    d, r = basis.dim, basis.r
    w = N * (N - 1) / 2.0
    sizes = {"D2": d, "Q2": d, "G2": r * r}
    out = []
    for kind, payload in factors:
        if kind not in sizes:
            raise ValueError("unknown cone kind %r (want D2, Q2, or G2)" % (kind,))
        n = sizes[kind]
        P = np.asarray(payload, dtype=float)
        if P.ndim == 1:
            if P.shape != (n,):
                raise ValueError("%s vector factor has length %d, expected %d"
                                 % (kind, P.shape[0], n))
            P = np.outer(P, P)
        else:
            if P.shape != (n, n):
                raise ValueError("%s matrix factor has shape %s, expected (%d, %d)"
                                 % (kind, P.shape, n, n))
            P = 0.5 * (P + P.T)
            lam = np.linalg.eigvalsh(P)[0]
            if lam < -1e-10 * max(1.0, np.abs(P).max()):
                raise ValueError("%s matrix factor is not PSD (min eig %.3e)" % (kind, lam))
        if kind == "D2":
            B = P
        elif kind == "Q2":
            B = lift_q2_linear_adjoint(P, basis, N) + (np.trace(P) / w) * np.eye(d)
        else:
            B = lift_g2_adjoint(P, basis, N)
        out.append(DualConeElement(PackedMatrix(basis, 0.5 * (B + B.T)), kind,
                                   provenance=payload))
    return out
