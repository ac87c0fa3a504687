"""Command-line front end: solve, scan, verify.

Reports are deterministic by construction: the fully-resolved configuration
is echoed into the output, the only volatile values (timestamp, wall time)
live under a single "runtime" key, and files are written to a temporary name
then renamed, so an interrupted run never leaves a partial report.

Exit codes: 0 success/converged, 1 input error (nothing written), 2 solver
ran but did not converge (report still written).
"""
from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
from concurrent.futures import ThreadPoolExecutor
from datetime import datetime, timezone

import numpy as np

from .dual import DualProblem, hellmann_feynman_check, solve_dual
from .fci import fci_ground_state
from .hamiltonians import (IntegralSet, assemble_reduced_hamiltonian,
                           hubbard_chain, parse_fcidump)
from .nrep import contract_to_1rdm, t2_dual_element
from .pairspace import PairBasis, PackedMatrix
from .primal import PrimalProblem, check_feasibility, solve_primal
from .properties import (bond_coherence, dipole_moment, load_orbital_data,
                         metallic_character, mulliken_charges, natural_orbitals)

SCHEMA = "rdmcone-report/1"
EXIT_OK = 0
EXIT_INPUT = 1
EXIT_NOCONV = 2

CONDITION_SETS = ("dq", "dqg", "dqgt")


class CliError(Exception):
    """Input-level failure; maps to exit code 1 and writes nothing."""


class _Parser(argparse.ArgumentParser):
    # argparse exits with status 2 on bad flags; the contract reserves 2 for
    # non-convergence, so remap flag errors to the input-error code
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write("%s: error: %s\n" % (self.prog, message))
        raise SystemExit(EXIT_INPUT)


def _jsonify(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    raise TypeError("not JSON serializable: %r" % (obj,))


def _atomic_write(path, text):
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".rdmcone-")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _emit(text, output):
    if output:
        _atomic_write(output, text)
    else:
        sys.stdout.write(text)
        if not text.endswith("\n"):
            sys.stdout.write("\n")


def _parse_hubbard(spec):
    params = {"t": 1.0, "U": 0.0, "periodic": 0}
    for item in spec.split(","):
        if not item:
            continue
        if "=" not in item:
            raise CliError("hubbard spec entry %r is not key=value" % item)
        key, val = item.split("=", 1)
        key = key.strip()
        if key not in ("L", "t", "U", "periodic"):
            raise CliError("unknown hubbard key %r (want L, t, U, periodic)" % key)
        try:
            params[key] = float(val)
        except ValueError:
            raise CliError("hubbard value %r for %s is not a number" % (val, key))
    if "L" not in params:
        raise CliError("hubbard spec needs L=<sites>")
    L = int(params["L"])
    if L != params["L"]:
        raise CliError("hubbard L must be an integer, got %s" % params["L"])
    return L, params["t"], params["U"], bool(params["periodic"])


def _load_integrals(args):
    sources = sum(1 for s in (getattr(args, "fcidump", None),
                              getattr(args, "hubbard", None)) if s)
    if sources == 0:
        raise CliError("no input: give --fcidump or --hubbard")
    if sources > 1:
        raise CliError("give exactly one of --fcidump and --hubbard")
    if getattr(args, "fcidump", None):
        path = args.fcidump
        if isinstance(path, list):
            path = path[0]
        if not os.path.exists(path):
            raise CliError("cannot read %s: no such file" % path)
        try:
            return parse_fcidump(path), os.path.basename(path)
        except ValueError as exc:
            raise CliError("%s: %s" % (path, exc))
    L, t, U, periodic = _parse_hubbard(args.hubbard)
    try:
        ints = hubbard_chain(L, t, U, periodic=periodic)
    except ValueError as exc:
        raise CliError(str(exc))
    return ints, "hubbard-L%d-U%g" % (L, U)


def _resolve_method(conditions, method):
    if conditions not in CONDITION_SETS:
        raise CliError("unknown condition set %r (choose from %s)"
                       % (conditions, ", ".join(CONDITION_SETS)))
    if method == "auto":
        method = "dual" if conditions == "dqgt" else "primal"
    if method == "primal" and conditions == "dqgt":
        raise CliError("the primal solver has no pair-creation-annihilation "
                       "block; use --method dual for dqgt")
    return method


def _dual_counts(conditions, r, n_g, n_t2):
    if n_g is None:
        n_g = {"dq": 0, "dqg": r, "dqgt": r}[conditions]
    if n_t2 is None:
        n_t2 = {"dq": 0, "dqg": 0, "dqgt": r}[conditions]
    return n_g, n_t2


def _primal_conditions(conditions):
    return {"dq": ("D2", "Q2"), "dqg": ("D2", "Q2", "G2")}[conditions]


def _properties_block(rdm2, args, ints_label):
    rdm1 = contract_to_1rdm(rdm2)
    nat = natural_orbitals(rdm1, spin_summed=True)
    block = {
        "natural_occupations": [float(v) for v in nat.occupations],
        "entropy": nat.entropy,
    }
    if ints_label.startswith("hubbard"):
        block["bond_coherence"] = bond_coherence(rdm1)
    if getattr(args, "orbdata", None):
        try:
            orb = load_orbital_data(args.orbdata)
        except (OSError, ValueError) as exc:
            raise CliError("%s: %s" % (args.orbdata, exc))
        block["metallic_character"] = metallic_character(rdm1, orb)
        block["mulliken_charges"] = [float(q) for q in mulliken_charges(rdm1, orb)]
        if orb.dipole_integrals is not None:
            dip = dipole_moment(rdm1, orb)
            block["dipole_debye"] = [float(v) for v in dip["components_debye"]]
            block["dipole_magnitude_debye"] = dip["magnitude_debye"]
    return block


def _report_text(report):
    return json.dumps(report, sort_keys=True, indent=2, default=_jsonify) + "\n"


def cmd_solve(args):
    ints, label = _load_integrals(args)
    N = args.n if args.n is not None else ints.n_electrons
    if N < 2:
        raise CliError("solver needs N >= 2, got N=%d" % N)
    method = _resolve_method(args.conditions, args.method)
    if args.hf_check and method != "dual":
        raise CliError("--hf-check relies on the dual multiplier; use --method dual")
    try:
        red = assemble_reduced_hamiltonian(
            ints if args.ms2 is None else ints.with_electrons(ints.n_electrons, args.ms2),
            N)
    except ValueError as exc:
        raise CliError(str(exc))
    r = red.r

    config = {
        "command": "solve", "input": label, "fcidump": args.fcidump,
        "hubbard": args.hubbard, "n": N, "ms2": args.ms2,
        "conditions": args.conditions, "method": method,
        "tol": args.tol, "max_iterations": args.max_iterations,
        "max_outer": args.max_outer, "inner_maxiter": args.inner_maxiter,
        "seed": args.seed, "n_g": None, "n_t2": None,
        "with_fci": bool(args.with_fci), "emit_rdm": bool(args.emit_rdm),
        "orbdata": args.orbdata, "hf_check": bool(args.hf_check),
        "output": args.output,
    }
    results = {"conditions": args.conditions, "method": method}

    if method == "primal":
        tol = args.tol if args.tol is not None else 1e-6
        config["tol"] = tol
        problem = PrimalProblem(red, _primal_conditions(args.conditions))
        rep = solve_primal(problem, tol=tol, max_iterations=args.max_iterations)
        rdm2 = rep.rdm2
        converged = rep.converged
        results.update({
            "energy": rep.energy,
            "certificate": rep.certificate,
            "residual_gap": rep.residual_gap,
            "primal_residual": rep.primal_residual,
            "dual_residual": rep.dual_residual,
            "iterations": rep.iterations,
            "converged": rep.converged,
            "feasibility": check_feasibility(rdm2, problem.conditions),
        })
        wall = rep.wall_time
    else:
        tol = args.tol if args.tol is not None else 1e-8
        config["tol"] = tol
        n_g, n_t2 = _dual_counts(args.conditions, r, args.n_g, args.n_t2)
        config["n_g"], config["n_t2"] = n_g, n_t2
        problem = DualProblem(red, n_g=n_g, n_t2=n_t2)
        cert, mult, _ = solve_dual(problem, tol=tol, max_outer=args.max_outer,
                                   inner_maxiter=args.inner_maxiter, seed=args.seed)
        rdm2 = mult.rdm2
        converged = cert.converged
        results.update({
            "energy": cert.energy,
            "rigorous_bound": cert.rigorous_bound,
            "residual": cert.residual_norm,
            "epsilon": cert.epsilon,
            "bound_history": cert.bound_history,
            "multiplier_trace_error": mult.trace_error,
            "outer_iterations": cert.outer_iterations,
            "function_evals": cert.function_evals,
            "converged": cert.converged,
        })
        wall = cert.wall_time
        if args.hf_check:
            rng = np.random.default_rng(args.seed)
            basis = red.K.basis
            Delta = rng.standard_normal((basis.dim, basis.dim))
            Delta = 0.5 * (Delta + Delta.T)
            Delta /= np.linalg.norm(Delta)
            hf = hellmann_feynman_check(problem, Delta, tol=tol,
                                        max_outer=args.max_outer, seed=args.seed)
            results["hf_check"] = {"numeric": hf["numeric"],
                                   "pairing": hf["pairing"],
                                   "difference": hf["difference"]}

    if args.with_fci:
        try:
            fci = fci_ground_state(ints, N=N, ms2=args.ms2)
            results["fci"] = {"energy": fci.energy, "gap": fci.gap,
                              "degenerate": fci.degenerate,
                              "solver_minus_fci": results["energy"] - fci.energy}
        except ValueError as exc:
            results["fci"] = {"error": str(exc)}

    results["properties"] = _properties_block(rdm2, args, label)

    if args.emit_rdm:
        D = rdm2.matrix.m
        d = rdm2.basis.dim
        tri = [D[a, b] for a in range(d) for b in range(a + 1)]
        results["rdm2"] = {
            "ordering": "packed lower triangle, row-major, pair order "
                        "(0,1),(0,2),...,(r-2,r-1) over spin orbitals "
                        "(spatial p -> 2p alpha, 2p+1 beta)",
            "r": rdm2.basis.r, "n": rdm2.N,
            "lower_triangle": [float(v) for v in tri],
        }

    report = {
        "schema": SCHEMA,
        "config": config,
        "results": results,
        "runtime": {
            "timestamp": datetime.now(timezone.utc).isoformat(),
            "wall_time_s": wall,
        },
    }
    _emit(_report_text(report), args.output)
    return EXIT_OK if converged else EXIT_NOCONV


def _scan_point(point, args):
    label, ints, N = point
    row = {"label": label, "e_fci": None, "e_dqg": None, "e_dqgt": None,
           "gap_dqg": None, "gap_dqgt": None, "dqg_converged": None,
           "dqgt_converged": None, "error": ""}
    try:
        red = assemble_reduced_hamiltonian(ints, N)
        fci_energy = None
        try:
            fci_energy = fci_ground_state(ints, N=N).energy
            row["e_fci"] = fci_energy
        except ValueError as exc:
            row["error"] = "fci: %s" % exc
        prep = solve_primal(PrimalProblem(red, ("D2", "Q2", "G2")),
                            tol=args.tol if args.tol is not None else 1e-6,
                            max_iterations=args.max_iterations)
        row["e_dqg"] = prep.energy
        row["dqg_converged"] = prep.converged
        n_g, n_t2 = _dual_counts("dqgt", red.r, args.n_g, args.n_t2)
        cert, _, _ = solve_dual(DualProblem(red, n_g=n_g, n_t2=n_t2),
                                tol=args.dual_tol, max_outer=args.max_outer,
                                seed=args.seed)
        row["e_dqgt"] = cert.rigorous_bound
        row["dqgt_converged"] = cert.converged
        if fci_energy is not None:
            row["gap_dqg"] = fci_energy - prep.energy
            row["gap_dqgt"] = fci_energy - cert.rigorous_bound
    except (ValueError, ArithmeticError) as exc:
        row["error"] = str(exc)
    return row


def cmd_scan(args):
    points = []
    if args.fcidump:
        for path in args.fcidump:
            if not os.path.exists(path):
                raise CliError("cannot read %s: no such file" % path)
            try:
                ints = parse_fcidump(path)
            except ValueError as exc:
                raise CliError("%s: %s" % (path, exc))
            N = args.n if args.n is not None else ints.n_electrons
            points.append((os.path.basename(path), ints, N))
    if args.hubbard:
        if not args.u_list:
            raise CliError("--hubbard scans need --u-list")
        L, t, _, periodic = _parse_hubbard(args.hubbard)
        for tok in args.u_list.split(","):
            try:
                U = float(tok)
            except ValueError:
                raise CliError("bad U value %r in --u-list" % tok)
            ints = hubbard_chain(L, t, U, periodic=periodic)
            N = args.n if args.n is not None else ints.n_electrons
            points.append(("L%d-U%g" % (L, U), ints, N))
    if not points:
        raise CliError("scan needs at least one input point")

    jobs = args.jobs
    env_cap = os.environ.get("RDMCONE_THREADS")
    if env_cap:
        try:
            jobs = max(1, min(jobs, int(env_cap)))
        except ValueError:
            raise CliError("RDMCONE_THREADS=%r is not an integer" % env_cap)
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            futures = [pool.submit(_scan_point, p, args) for p in points]
            rows = [f.result() for f in futures]
    else:
        rows = [_scan_point(p, args) for p in points]

    def fmt(v):
        if v is None:
            return ""
        if isinstance(v, bool):
            return "yes" if v else "no"
        if isinstance(v, float):
            return "%.12g" % v
        return str(v)

    cols = ["label", "e_fci", "e_dqg", "e_dqgt", "gap_dqg", "gap_dqgt",
            "dqg_converged", "dqgt_converged", "error"]
    lines = [",".join(cols)]
    for row in rows:
        lines.append(",".join(fmt(row[c]).replace(",", ";") for c in cols))
    _emit("\n".join(lines) + "\n", args.output)
    if any(r["error"] for r in rows):
        return EXIT_NOCONV
    return EXIT_OK


# -- verify: bundled invariant suite ----------------------------------------

def _fock_creation_ops(r):
    dim = 1 << r
    ops = []
    for p in range(r):
        bp = 1 << p
        mat = np.zeros((dim, dim))
        for m in range(dim):
            if not (m & bp):
                mat[m | bp, m] = 1 - 2 * (bin(m & (bp - 1)).count("1") & 1)
        ops.append(mat)
    return ops


def _check_oracle_energy():
    ints = hubbard_chain(2, 1.0, 4.0)
    res = fci_ground_state(ints)
    exact = 2.0 - np.sqrt(8.0)
    from .pairspace import hermitian_inner_product
    red = assemble_reduced_hamiltonian(ints, 2)
    recon = hermitian_inner_product(red.K, res.rdm2.matrix)
    err = max(abs(res.energy - exact), abs(recon - res.energy))
    return err < 1e-10, "max deviation %.2e" % err


def _check_lift_oracle():
    from .nrep import TwoRDM, lift_G2, lift_Q2
    from .pairspace import PackedMatrix
    rng = np.random.default_rng(3)
    r, N = 4, 2
    cre = _fock_creation_ops(r)
    ann = [c.T for c in cre]
    dim = 1 << r
    idx = [m for m in range(dim) if bin(m).count("1") == N]
    psi = np.zeros(dim)
    psi[idx] = rng.standard_normal(len(idx))
    psi /= np.linalg.norm(psi)
    basis = PairBasis(r)
    d = basis.dim
    D = np.zeros((d, d))
    for a in range(d):
        i, j = basis.pair_of(a)
        for b in range(d):
            k, l = basis.pair_of(b)
            D[a, b] = psi @ (cre[i] @ cre[j] @ ann[l] @ ann[k]) @ psi
    rdm = TwoRDM(PackedMatrix(basis, D), N)
    Q = lift_Q2(rdm).m
    G = lift_G2(rdm)
    err = 0.0
    for a in range(d):
        i, j = basis.pair_of(a)
        for b in range(d):
            k, l = basis.pair_of(b)
            ref = psi @ (ann[i] @ ann[j] @ cre[l] @ cre[k]) @ psi
            err = max(err, abs(Q[a, b] - ref))
    for i in range(r):
        for j in range(r):
            for k in range(r):
                for l in range(r):
                    ref = psi @ (cre[i] @ ann[j] @ cre[l] @ ann[k]) @ psi
                    err = max(err, abs(G[i * r + j, k * r + l] - ref))
    return err < 1e-10, "worst element error %.2e" % err


def _check_t2_pairing():
    rng = np.random.default_rng(5)
    worst = np.inf
    for L, U in ((2, 4.0), (4, 4.0)):
        ints = hubbard_chain(L, 1.0, U)
        res = fci_ground_state(ints)
        basis = res.rdm2.basis
        for _ in range(25):
            c = rng.standard_normal((basis.dim, basis.r))
            c /= np.linalg.norm(c)
            B = t2_dual_element(c, res.rdm2.N, basis).B
            worst = min(worst, float(np.tensordot(B.m, res.rdm2.matrix.m)))
    return worst > -1e-10, "most negative pairing %.2e" % worst


def _check_lower_bound():
    worst = -np.inf
    detail = []
    for L, U in ((2, 4.0), (4, 4.0)):
        ints = hubbard_chain(L, 1.0, U)
        e_fci = fci_ground_state(ints).energy
        red = assemble_reduced_hamiltonian(ints, ints.n_electrons)
        rep = solve_primal(PrimalProblem(red), tol=1e-6)
        excess = (rep.energy - rep.residual_gap) - e_fci
        worst = max(worst, excess)
        cert, _, _ = solve_dual(DualProblem(red, n_g=red.r, n_t2=red.r),
                                tol=1e-6, max_outer=6)
        for bound in cert.bound_history:
            worst = max(worst, bound - e_fci)
        detail.append("L%dU%g ok" % (L, U))
    return worst <= 1e-9, "worst certified excess above FCI %.2e" % worst


def _check_hellmann_feynman():
    ints = hubbard_chain(2, 1.0, 4.0)
    red = assemble_reduced_hamiltonian(ints, 2)
    rng = np.random.default_rng(9)
    basis = red.K.basis
    Delta = rng.standard_normal((basis.dim, basis.dim))
    Delta = 0.5 * (Delta + Delta.T)
    Delta /= np.linalg.norm(Delta)
    hf = hellmann_feynman_check(DualProblem(red), Delta, tol=1e-9)
    return abs(hf["difference"]) < 1e-4, "numeric vs pairing gap %.2e" % hf["difference"]


VERIFY_CHECKS = (
    ("oracle-energy", _check_oracle_energy),
    ("lift-oracle", _check_lift_oracle),
    ("t2-pairing", _check_t2_pairing),
    ("lower-bound-safety", _check_lower_bound),
    ("hellmann-feynman", _check_hellmann_feynman),
)


def cmd_verify(args):
    selected = [(name, fn) for name, fn in VERIFY_CHECKS
                if args.only is None or args.only in name]
    if not selected:
        raise CliError("no verify check matches %r (have: %s)"
                       % (args.only, ", ".join(n for n, _ in VERIFY_CHECKS)))
    outcomes = []
    all_ok = True
    for name, fn in selected:
        ok, detail = fn()
        outcomes.append({"check": name, "passed": bool(ok), "detail": detail})
        all_ok = all_ok and ok
        sys.stdout.write("%s %s (%s)\n" % ("PASS" if ok else "FAIL", name, detail))
    if args.output:
        report = {"schema": SCHEMA, "config": {"command": "verify", "only": args.only},
                  "results": {"checks": outcomes, "all_passed": bool(all_ok)},
                  "runtime": {"timestamp": datetime.now(timezone.utc).isoformat()}}
        _atomic_write(args.output, _report_text(report))
    return EXIT_OK if all_ok else EXIT_NOCONV


def _build_parser():
    parser = _Parser(prog="rdmcone",
                     description="Variational lower bounds on many-fermion "
                                 "ground-state energies from 2-RDM cone programs.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--fcidump", help="FCIDUMP input path")
        p.add_argument("--hubbard", help="chain spec, e.g. L=4,t=1,U=4[,periodic=1]")
        p.add_argument("--n", type=int, help="particle count (default: from input)")
        p.add_argument("--tol", type=float, help="convergence tolerance "
                       "(default: 1e-6 primal, 1e-8 dual)")
        p.add_argument("--max-iterations", type=int, default=20000,
                       help="primal iteration cap (default 20000)")
        p.add_argument("--max-outer", type=int, default=40,
                       help="dual outer-loop cap (default 40)")
        p.add_argument("--inner-maxiter", type=int, default=300,
                       help="dual inner-solve iteration cap (default 300)")
        p.add_argument("--seed", type=int, default=1,
                       help="seed for dual factor initialization (default 1)")
        p.add_argument("--n-g", type=int, default=None,
                       help="particle-hole factor count (default: by condition set)")
        p.add_argument("--n-t2", type=int, default=None,
                       help="pair-creation-annihilation factor count (default: by "
                            "condition set)")
        p.add_argument("--output", help="write report here (default: stdout)")

    ps = sub.add_parser("solve", help="single-point solve")
    common(ps)
    ps.add_argument("--ms2", type=int, default=None,
                    help="2*Sz sector (default: from input)")
    ps.add_argument("--conditions", default="dqg", choices=CONDITION_SETS,
                    help="positivity set (default dqg)")
    ps.add_argument("--method", default="auto", choices=("auto", "primal", "dual"),
                    help="auto picks primal, or dual for dqgt")
    ps.add_argument("--with-fci", action="store_true",
                    help="also run the determinant oracle and report the gap")
    ps.add_argument("--emit-rdm", action="store_true",
                    help="include the packed 2-RDM lower triangle in the report")
    ps.add_argument("--orbdata", help="ORBDATA 1 file for AO-level properties")
    ps.add_argument("--hf-check", action="store_true",
                    help="energy-derivative consistency check (dual only)")
    ps.set_defaults(func=cmd_solve)

    pc = sub.add_parser("scan", help="multi-point scan to CSV")
    pc.add_argument("--fcidump", action="append", default=None,
                    help="FCIDUMP input (repeatable)")
    pc.add_argument("--hubbard", help="chain spec; U supplied by --u-list")
    pc.add_argument("--u-list", help="comma-separated U values for --hubbard")
    pc.add_argument("--n", type=int, help="particle count (default: from input)")
    pc.add_argument("--tol", type=float, help="primal tolerance (default 1e-6)")
    pc.add_argument("--dual-tol", type=float, default=1e-7,
                    help="dual tolerance (default 1e-7)")
    pc.add_argument("--max-iterations", type=int, default=20000)
    pc.add_argument("--max-outer", type=int, default=15)
    pc.add_argument("--seed", type=int, default=1)
    pc.add_argument("--n-g", type=int, default=None)
    pc.add_argument("--n-t2", type=int, default=None)
    pc.add_argument("--jobs", type=int, default=1,
                    help="parallel points (capped by RDMCONE_THREADS)")
    pc.add_argument("--output", help="write CSV here (default: stdout)")
    pc.set_defaults(func=cmd_scan)

    pv = sub.add_parser("verify", help="run the bundled invariant suite")
    pv.add_argument("--only", default=None,
                    help="substring filter on check names")
    pv.add_argument("--output", help="also write a JSON summary here")
    pv.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if exc.code is not None else EXIT_INPUT
    try:
        return args.func(args)
    except CliError as exc:
        sys.stderr.write("rdmcone: %s\n" % exc)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
