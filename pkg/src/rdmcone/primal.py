"""Boundary-point semidefinite solver for the lower-bound energy program.

Minimizes Tr(K D) over packed 2-RDMs D with Tr(D) = N(N-1)/2 and positivity
imposed on any subset of {D, Q, G}: the lifted blocks enter as independent
variables tied to D by equality constraints, and an augmented-Lagrangian
iteration alternates a least-squares solve for the multipliers with
eigenvalue splits of each block.

The multiplier solve is the only nontrivial linear algebra.  Its normal
matrix is an identity plus low-rank maps through the 1-RDM contraction, so
it is inverted once by a Woodbury factorization; per iteration only dense
matrix-vector products and three symmetric eigendecompositions remain.

Every iterate yields a rigorous lower bound: for any multipliers y the value
b.y plus the minimum eigenvalue of each residual block times that block's
fixed feasible trace is a certified bound, whether or not the iteration has
converged.  The reported residual_gap is energy minus the best such bound.
"""
from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .hamiltonians import ReducedHamiltonian
from .nrep import (TwoRDM, contract_gamma, lambda_q, lift_g2_adjoint,
                   lift_g2_raw, lift_q2_linear, lift_q2_linear_adjoint)
from .pairspace import PackedMatrix, psd_part

KNOWN_CONDITIONS = ("D2", "Q2", "G2")


@dataclass
class PrimalProblem:
    """Reduced Hamiltonian plus the positivity conditions to impose."""

    hamiltonian: ReducedHamiltonian
    conditions: tuple = ("D2", "Q2", "G2")

    def __post_init__(self):
        conds = tuple(self.conditions)
        for c in conds:
            if c not in KNOWN_CONDITIONS:
                raise ValueError("unknown condition %r (choose from %s)"
                                 % (c, KNOWN_CONDITIONS))
        if "D2" not in conds:
            raise ValueError("the 2-RDM cone itself is mandatory")
        if self.hamiltonian.N < 2:
            raise ValueError("pair program needs N >= 2, got N=%d" % self.hamiltonian.N)
        self.conditions = conds


@dataclass
class SolveReport:
    """Outcome of a primal solve; energies include the core term."""

    energy: float
    certificate: float
    residual_gap: float
    primal_residual: float
    dual_residual: float
    iterations: int
    converged: bool
    conditions: tuple
    rdm2: TwoRDM
    wall_time: float = 0.0


class _PrimalOps:
    """Dense operator matrices and the Woodbury-factorized multiplier solve."""

    def __init__(self, basis, N, has_q, has_g):
        self.basis, self.N = basis, N
        self.has_q, self.has_g = has_q, has_g
        r, d = basis.r, basis.dim
        self.d = d
        self.w = N * (N - 1) / 2.0
        self.Ip = np.eye(d)
        r2 = r * r
        # columns of the contraction and hole-embedding maps, one unit matrix
        # at a time; both are small (r^2 x d^2 and d^2 x r^2)
        Gm = np.zeros((r2, d * d))
        E = np.zeros((d, d))
        for a in range(d):
            for b in range(d):
                E[a, b] = 1.0
                Gm[:, a * d + b] = contract_gamma(E, basis, N).ravel()
                E[a, b] = 0.0
        Lm = np.zeros((d * d, r2))
        T = np.zeros((r, r))
        for p in range(r):
            for q in range(r):
                T[p, q] = 1.0
                Lm[:, p * r + q] = lambda_q(T, basis).ravel()
                T[p, q] = 0.0
        alpha = 1.0 + (1.0 if has_q else 0.0) + (4.0 if has_g else 0.0)
        beta = (r - 2.0 * N + 2.0) if has_g else 0.0
        self.alpha = alpha
        if has_q:
            U = np.hstack([Gm.T, Lm])
            LtL = Lm.T @ Lm
            C0inv = np.block([[np.zeros((r2, r2)), np.eye(r2)],
                              [np.eye(r2), -(beta * np.eye(r2) + LtL)]])
        elif has_g and abs(beta) > 1e-14:
            U = Gm.T
            C0inv = np.eye(r2) / beta
        else:
            U = np.zeros((d * d, 0))
            C0inv = np.zeros((0, 0))
        self.U = U
        if U.shape[1]:
            self.W0inv = np.linalg.inv(alpha * C0inv + U.T @ U)
        else:
            self.W0inv = None
        self.MinvI = self.m_solve(self.Ip)
        self.trMinvI = float(np.trace(self.MinvI))

    def m_solve(self, B):
        x = B.ravel()
        if self.W0inv is None:
            return (x / self.alpha).reshape(self.d, self.d)
        t = self.U.T @ x
        y = (x - self.U @ (self.W0inv @ t)) / self.alpha
        return y.reshape(self.d, self.d)


def _certificate(K, Dhat, yt, YQ, YG, w, tr_q, tr_g):
    # b.y plus min-eigenvalue corrections; valid for arbitrary multipliers
    cert = w * yt
    if YQ is not None:
        cert += float(np.trace(YQ))
    cert += float(np.linalg.eigvalsh(K - Dhat)[0]) * w
    if YQ is not None:
        cert += float(np.linalg.eigvalsh(-0.5 * (YQ + YQ.T))[0]) * tr_q
    if YG is not None:
        cert += float(np.linalg.eigvalsh(-0.5 * (YG + YG.T))[0]) * tr_g
    return cert


def solve_primal(problem, tol: float = 1e-6, max_iterations: int = 20000,
                 sigma0: float = 1.0, over_relaxation: float = 1.7,
                 callback=None) -> SolveReport:
    """Run the boundary-point iteration on a PrimalProblem.

    Converged means primal residual, dual residual, and the certified gap
    relative to 1+|E| are all below tol.  The returned report is meaningful
    either way: its certificate is a rigorous lower bound at any iterate.
    """
    if isinstance(problem, ReducedHamiltonian):
        problem = PrimalProblem(problem)
    if max_iterations < 1:
        raise ValueError("max_iterations must be at least 1")
    red = problem.hamiltonian
    basis, N = red.K.basis, red.N
    has_q = "Q2" in problem.conditions
    has_g = "G2" in problem.conditions
    K = red.K.m
    core = red.core_energy
    r, d = basis.r, basis.dim
    ops = _PrimalOps(basis, N, has_q, has_g)
    w = ops.w
    tr_q = (r - N) * (r - N - 1) / 2.0
    tr_g = N * (r - N + 1.0)
    rho = over_relaxation
    sigma = sigma0

    t0 = time.perf_counter()
    XD = (w / d) * np.eye(d)
    XQ = lift_q2_linear(XD, basis, N) + np.eye(d) if has_q else None
    XG = lift_g2_raw(XD, basis, N) if has_g else None
    ZD = np.zeros((d, d))
    ZQ = np.zeros((d, d)) if has_q else None
    ZG = np.zeros((r * r, r * r)) if has_g else None
    normb = np.sqrt(w ** 2 + (d if has_q else 0.0))
    normC = np.linalg.norm(K)
    best_cert = -np.inf
    rP = rD = np.inf
    energy = float(np.tensordot(K, XD))
    it = 0

    for it in range(1, max_iterations + 1):
        at = np.trace(XD)
        aq = XQ - lift_q2_linear(XD, basis, N) if has_q else None
        ag = XG - lift_g2_raw(XD, basis, N) if has_g else None
        KZ = K - ZD
        rhs_t = np.trace(KZ) + (w - at) / sigma
        acc = np.zeros((d, d))
        rhs_q = rhs_g = None
        if has_q:
            rhs_q = -ZQ - lift_q2_linear(KZ, basis, N) + (ops.Ip - aq) / sigma
            acc -= lift_q2_linear_adjoint(rhs_q, basis, N)
        if has_g:
            rhs_g = -ZG - lift_g2_raw(KZ, basis, N) - ag / sigma
            acc -= lift_g2_adjoint(rhs_g, basis, N)
        D0 = ops.m_solve(acc)
        yt = (rhs_t - np.trace(D0)) / ops.trMinvI
        Dhat = D0 + yt * ops.MinvI
        Dhat = 0.5 * (Dhat + Dhat.T)
        YQ = rhs_q + lift_q2_linear(Dhat, basis, N) if has_q else None
        YG = rhs_g + lift_g2_raw(Dhat, basis, N) if has_g else None

        WD = Dhat - K + XD / sigma
        PD = psd_part(WD)
        ZD = PD - WD
        XD = (1 - rho) * XD + rho * sigma * PD
        if has_q:
            WQ = YQ + XQ / sigma
            PQ = psd_part(WQ)
            ZQ = PQ - WQ
            XQ = (1 - rho) * XQ + rho * sigma * PQ
        if has_g:
            WG = YG + XG / sigma
            PG = psd_part(WG)
            ZG = PG - WG
            XG = (1 - rho) * XG + rho * sigma * PG

        at = np.trace(XD)
        rp2 = (at - w) ** 2
        rd2 = np.linalg.norm(K - Dhat - ZD) ** 2
        if has_q:
            aq = XQ - lift_q2_linear(XD, basis, N)
            rp2 += np.linalg.norm(aq - ops.Ip) ** 2
            rd2 += np.linalg.norm(YQ + ZQ) ** 2
        if has_g:
            ag = XG - lift_g2_raw(XD, basis, N)
            rp2 += np.linalg.norm(ag) ** 2
            rd2 += np.linalg.norm(YG + ZG) ** 2
        rP = np.sqrt(rp2) / (1 + normb)
        rD = np.sqrt(rd2) / (1 + normC)
        energy = float(np.tensordot(K, XD))

        near = max(rP, rD) < 100 * tol
        if near or it % 25 == 0:
            cert = _certificate(K, Dhat, yt, YQ, YG, w, tr_q, tr_g)
            best_cert = max(best_cert, cert)
        if callback is not None:
            callback(it, energy + core, rP, rD, best_cert + core)
        if near:
            gap = max(0.0, energy - best_cert)
            if max(rP, rD, gap / (1.0 + abs(energy))) <= tol:
                break
        sigma = float(np.clip(sigma * np.sqrt(rD / max(rP, 1e-30)),
                              sigma / 1.05, sigma * 1.05))

    if not np.isfinite(best_cert):
        best_cert = _certificate(K, Dhat, yt, YQ, YG, w, tr_q, tr_g)
    gap = max(0.0, energy - best_cert)
    converged = max(rP, rD, gap / (1.0 + abs(energy))) <= tol
    XD = 0.5 * (XD + XD.T)
    return SolveReport(energy=energy + core,
                       certificate=best_cert + core,
                       residual_gap=gap,
                       primal_residual=float(rP),
                       dual_residual=float(rD),
                       iterations=it,
                       converged=bool(converged),
                       conditions=problem.conditions,
                       rdm2=TwoRDM(PackedMatrix(basis, XD), N),
                       wall_time=time.perf_counter() - t0)


def check_feasibility(rdm2: TwoRDM, conditions=("D2", "Q2", "G2"), tol: float = 1e-6):
    """Minimum eigenvalue of each requested lifted block plus the trace error.

    Returns a dict: per-condition minimum eigenvalues, 'trace_error', and an
    'ok' flag meaning every minimum is above -tol and the trace is within tol.
    """
    basis, N = rdm2.basis, rdm2.N
    D = rdm2.matrix.m
    out = {}
    ok = True
    for c in conditions:
        if c == "D2":
            lam = float(np.linalg.eigvalsh(0.5 * (D + D.T))[0])
        elif c == "Q2":
            Q = lift_q2_linear(D, basis, N) + np.eye(basis.dim)
            lam = float(np.linalg.eigvalsh(0.5 * (Q + Q.T))[0])
        elif c == "G2":
            G = lift_g2_raw(D, basis, N)
            lam = float(np.linalg.eigvalsh(0.5 * (G + G.T))[0])
        else:
            raise ValueError("unknown condition %r" % (c,))
        out[c] = lam
        ok = ok and lam >= -tol
    out["trace_error"] = float(np.trace(D) - rdm2.pair_trace)
    out["ok"] = bool(ok and abs(out["trace_error"]) <= tol)
    return out
