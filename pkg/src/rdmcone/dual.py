"""Factorized dual-cone solver: certified lower bounds with the 2-RDM as multiplier.

The bound program is  max eps * w  subject to

    F F^T + Q2^t(H H^T) + G2^t(sum_f v_f v_f^T) + sum_f B(c_f) + eps I = K,

where each summand is a dual-cone element by construction: any factor square
pairs nonnegatively with every representable 2-RDM.  Feasible parameters
certify E >= eps * w; slightly infeasible ones still certify

    eps * w - max(0, lambda_max(R)) * w,      R = (left side) - K,

because the ground-state 2-RDM is PSD with trace w.  An augmented-Lagrangian
outer loop enforces R = 0; its running multiplier X converges to the
optimizer's 2-RDM, recovering the primal solution from the dual run without
ever representing the primal cone explicitly.

The equality constraint is never satisfied exactly in floating point, so
every outer iterate's rigorous bound is recorded (bound_history) and the best
one is reported; the trace of X is monitored, not constrained, and drifting
to w is part of the convergence evidence.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from .hamiltonians import ReducedHamiltonian
from .nrep import (TwoRDM, lift_g2_adjoint, lift_g2_raw, lift_q2_linear,
                   lift_q2_linear_adjoint, t2_pair_gradient, t2_sum)
from .pairspace import PackedMatrix

STALL_FACTOR = 0.999
STALL_LIMIT = 3
SIGMA_CAP = 1e7


@dataclass
class MultiplierRDM:
    """2-RDM recovered as the equality multiplier, with its trace drift.

    The trace is not constrained; trace_error -> 0 is emergent and serves as
    independent evidence that the multiplier converged to a density matrix.
    """

    rdm2: TwoRDM
    trace_error: float


@dataclass
class DualProblem:
    """Reduced Hamiltonian plus the factor counts of the bound ansatz.

    include_q2 toggles the two-hole square (full-rank factor H); n_g and n_t2
    count rank-one particle-hole and pair-creation-annihilation factors.  The
    plain two-cone ansatz is n_g = n_t2 = 0.
    """

    hamiltonian: ReducedHamiltonian
    n_g: int = 0
    n_t2: int = 0
    include_q2: bool = True

    def __post_init__(self):
        if self.n_g < 0 or self.n_t2 < 0:
            raise ValueError("factor counts must be nonnegative")
        if self.hamiltonian.N < 2:
            raise ValueError("bound program needs N >= 2, got N=%d" % self.hamiltonian.N)


@dataclass
class WarmStart:
    """Parameter vector, multiplier, and penalty weight of a previous solve."""

    theta: np.ndarray = field(repr=False)
    X: np.ndarray = field(repr=False)
    sigma: float = 1.0


@dataclass
class DualCertificate:
    """Certified outcome of a dual solve; energies include the core term."""

    energy: float
    epsilon: float
    rigorous_bound: float
    residual_matrix: np.ndarray = field(repr=False)
    residual_norm: float = 0.0
    bound_history: list = field(default_factory=list, repr=False)
    outer_iterations: int = 0
    function_evals: int = 0
    converged: bool = False
    wall_time: float = 0.0


class _DualShape:
    """Flat parameter layout [eps, F, H, V, C] with slice bookkeeping."""

    def __init__(self, basis, N, n_g, n_t2, include_q2):
        self.basis, self.N = basis, N
        self.n_g, self.n_t2, self.include_q2 = n_g, n_t2, include_q2
        d, r = basis.dim, basis.r
        self.d, self.r = d, r
        self.w = N * (N - 1) / 2.0
        o = 1
        self.sl_F = slice(o, o + d * d)
        o += d * d
        if include_q2:
            self.sl_H = slice(o, o + d * d)
            o += d * d
        else:
            self.sl_H = None
        self.sl_V = slice(o, o + n_g * r * r)
        o += n_g * r * r
        self.sl_C = slice(o, o + n_t2 * d * r)
        o += n_t2 * d * r
        self.size = o

    def unpack(self, th):
        d, r = self.d, self.r
        eps = th[0]
        F = th[self.sl_F].reshape(d, d)
        H = th[self.sl_H].reshape(d, d) if self.include_q2 else None
        V = th[self.sl_V].reshape(self.n_g, r * r)
        C = th[self.sl_C].reshape(self.n_t2, d, r)
        return eps, F, H, V, C


def _factor_sum(sh, F, H, V, Cp):
    """Sum of pulled-back factor squares; also returns the expanded T2 stack."""
    basis, N, w = sh.basis, sh.N, sh.w
    S = F @ F.T
    if sh.include_q2:
        P = H @ H.T
        S = S + lift_q2_linear_adjoint(P, basis, N) + (np.trace(P) / w) * np.eye(sh.d)
    if sh.n_g:
        Y = V.T @ V
        S = S + lift_g2_adjoint(Y, basis, N)
    Cfull = None
    if sh.n_t2:
        Bt, Cfull = t2_sum(Cp, basis, N)
        S = S + Bt
    return S, Cfull


def _al_value_grad(th, sh, K, X, sigma):
    basis, N, w, d = sh.basis, sh.N, sh.w, sh.d
    eps, F, H, V, Cp = sh.unpack(th)
    S, Cfull = _factor_sum(sh, F, H, V, Cp)
    R = S - K + eps * np.eye(d)
    f = -w * eps + np.tensordot(X, R) + 0.5 * sigma * np.linalg.norm(R) ** 2
    Xhat = X + sigma * R
    g = np.empty_like(th)
    g[0] = -w + np.trace(Xhat)
    g[sh.sl_F] = (2.0 * Xhat @ F).ravel()
    if sh.include_q2:
        GH = lift_q2_linear(Xhat, basis, N) + (np.trace(Xhat) / w) * np.eye(d)
        g[sh.sl_H] = (2.0 * GH @ H).ravel()
    if sh.n_g:
        GX = lift_g2_raw(Xhat, basis, N)
        g[sh.sl_V] = (2.0 * V @ GX.T).ravel()
    if sh.n_t2:
        Xf = basis.to_full(Xhat)
        g[sh.sl_C] = t2_pair_gradient(Cfull, Xf, basis, N).ravel()
    return f, g


def rigorous_bound(epsilon: float, residual_matrix: np.ndarray, N: int,
                   core_energy: float = 0.0) -> float:
    """Certified lower bound from possibly-infeasible dual parameters.

    The constraint surplus R may push into the cone-violating direction; only
    its largest positive eigenvalue can erode the bound, and at most by
    lambda_max * w against a PSD trace-w 2-RDM.
    """
    w = N * (N - 1) / 2.0
    lam = float(np.linalg.eigvalsh(0.5 * (residual_matrix + residual_matrix.T))[-1])
    return epsilon * w - max(0.0, lam) * w + core_energy


def solve_dual(problem, tol: float = 1e-8, max_outer: int = 40,
               inner_maxiter: int = 300, sigma0: float = 1.0, seed: int = 1,
               init_scale: float = 1e-2, warm_start: WarmStart = None,
               callback=None):
    """Augmented-Lagrangian solve of the factorized bound program.

    Returns (certificate, multiplier, warm) where certificate carries the
    best rigorous bound and per-outer bound history, multiplier wraps the
    recovered 2-RDM estimate, and warm restarts a later solve (used by the
    energy-derivative check and by parameter scans).
    """
    if isinstance(problem, ReducedHamiltonian):
        problem = DualProblem(problem)
    red = problem.hamiltonian
    basis, N = red.K.basis, red.N
    K = red.K.m
    core = red.core_energy
    sh = _DualShape(basis, N, problem.n_g, problem.n_t2, problem.include_q2)
    d, w = sh.d, sh.w
    t0 = time.perf_counter()

    if warm_start is not None:
        if warm_start.theta.shape != (sh.size,):
            raise ValueError("warm start has %d parameters, problem needs %d"
                             % (warm_start.theta.shape[0], sh.size))
        th = warm_start.theta.copy()
        X = 0.5 * (warm_start.X + warm_start.X.T)
        sigma = float(warm_start.sigma)
    else:
        rng = np.random.default_rng(seed)
        th = np.zeros(sh.size)
        vals, vecs = np.linalg.eigh(K)
        eps0 = vals[0] - 1e-3
        th[0] = eps0
        th[sh.sl_F] = (vecs @ np.diag(np.sqrt(np.clip(vals - eps0, 0.0, None)))).ravel()
        if sh.include_q2:
            th[sh.sl_H] = init_scale * rng.standard_normal(d * d)
        if sh.n_g:
            th[sh.sl_V] = init_scale * rng.standard_normal(sh.n_g * sh.r * sh.r)
        if sh.n_t2:
            th[sh.sl_C] = init_scale * rng.standard_normal(sh.n_t2 * d * sh.r)
        X = (w / d) * np.eye(d)
        sigma = sigma0

    bound_history = []
    best_bound = -np.inf
    res_prev = np.inf
    stall = 0
    nfev = 0
    rnorm = np.inf
    eps = float(th[0])
    R = np.zeros((d, d))

    for outer in range(1, max_outer + 1):
        out = minimize(_al_value_grad, th, args=(sh, K, X, sigma), jac=True,
                       method="L-BFGS-B",
                       options=dict(maxiter=inner_maxiter, maxfun=2 * inner_maxiter,
                                    ftol=1e-18, gtol=1e-12 * max(1.0, sigma)))
        th = out.x
        nfev += out.nfev
        if not np.all(np.isfinite(th)):
            raise ArithmeticError("dual parameters went non-finite at outer "
                                  "iteration %d (sigma=%.3e)" % (outer, sigma))
        eps, F, H, V, Cp = sh.unpack(th)
        S, _ = _factor_sum(sh, F, H, V, Cp)
        R = S - K + eps * np.eye(d)
        rnorm = float(np.linalg.norm(R))
        bound = rigorous_bound(eps, R, N, core)
        bound_history.append(bound)
        best_bound = max(best_bound, bound)
        X = X + sigma * R
        X = 0.5 * (X + X.T)
        if callback is not None:
            callback(outer, eps * w + core, rnorm, bound)
        if rnorm < tol:
            break
        # a flat residual while sigma still has headroom is the escalation
        # phase, not a stall; only give up once the penalty is maxed out
        if rnorm > STALL_FACTOR * res_prev and sigma >= SIGMA_CAP:
            stall += 1
            if stall >= STALL_LIMIT:
                break
        else:
            stall = 0
        if rnorm > 0.3 * res_prev:
            sigma = min(sigma * 5.0, SIGMA_CAP)
        res_prev = rnorm

    cert = DualCertificate(energy=eps * w + core,
                           epsilon=float(eps),
                           rigorous_bound=best_bound,
                           residual_matrix=R,
                           residual_norm=rnorm,
                           bound_history=bound_history,
                           outer_iterations=len(bound_history),
                           function_evals=nfev,
                           converged=bool(rnorm < tol),
                           wall_time=time.perf_counter() - t0)
    mult = MultiplierRDM(rdm2=TwoRDM(PackedMatrix(basis, X), N),
                         trace_error=float(np.trace(X) - w))
    warm = WarmStart(theta=th.copy(), X=X.copy(), sigma=sigma)
    return cert, mult, warm


def hellmann_feynman_check(problem: DualProblem, direction: np.ndarray,
                           step: float = 1e-4, tol: float = 1e-8,
                           max_outer: int = 40, inner_maxiter: int = 800,
                           seed: int = 1):
    """Compare the numeric derivative of the bound with the multiplier pairing.

    The optimal value as a function of the reduced Hamiltonian has slope
    equal to the recovered 2-RDM: (E(K + s D) - E(K - s D)) / 2s should match
    Tr(D X).  Off-center solves are warm-started from the center solution.
    """
    red = problem.hamiltonian
    basis = red.K.basis
    Delta = direction.m if isinstance(direction, PackedMatrix) else np.asarray(direction)
    Delta = 0.5 * (Delta + Delta.T)
    cert0, mult0, warm = solve_dual(problem, tol=tol, max_outer=max_outer,
                                    inner_maxiter=inner_maxiter, seed=seed)
    energies = []
    for s in (step, -step):
        Kp = PackedMatrix(basis, red.K.m + s * Delta)
        redp = ReducedHamiltonian(K=Kp, N=red.N, core_energy=red.core_energy)
        shifted = DualProblem(redp, n_g=problem.n_g, n_t2=problem.n_t2,
                              include_q2=problem.include_q2)
        cert, _, _ = solve_dual(shifted, tol=tol, max_outer=max_outer,
                                inner_maxiter=inner_maxiter, warm_start=warm)
        energies.append(cert.energy)
    numeric = (energies[0] - energies[1]) / (2.0 * step)
    pairing = float(np.tensordot(Delta, mult0.rdm2.matrix.m))
    return {"numeric": float(numeric), "pairing": pairing,
            "difference": float(numeric - pairing), "center": cert0}
