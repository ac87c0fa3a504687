"""Compare the compiled determinant kernels against the numpy fallback.

Run as: python3 benchmarks/bench_kernels.py

The hot loops are the sector-Hamiltonian build and the density accumulation,
both dominated by per-determinant bit fiddling that vectorizes poorly, which
is why they carry a compiled implementation at all.  This prints wall times
and the speedup so the tradeoff stays measurable.
"""
import time

import numpy as np

from rdmcone._kernels import have_extension, numpy_backend
from rdmcone.fci import determinant_basis
from rdmcone.pairspace import PairBasis

if have_extension:
    from rdmcone._kernels import _ckern
else:
    _ckern = None


def timed(fn, *args, repeats=3):
    best = float("inf")
    out = None
    for _ in range(repeats):
        t0 = time.perf_counter()
        out = fn(*args)
        best = min(best, time.perf_counter() - t0)
    return out, best


def bench_sector(r, na, nb):
    basis = determinant_basis(r, na, nb)
    pb = PairBasis(r)
    rng = np.random.default_rng(1)
    K = rng.standard_normal((pb.dim, pb.dim))
    K = 0.5 * (K + K.T)
    masks = np.ascontiguousarray(basis.masks, dtype=np.int64)
    index = np.ascontiguousarray(pb._index, dtype=np.int64)
    pi = np.ascontiguousarray(pb.pi, dtype=np.int64)
    pj = np.ascontiguousarray(pb.pj, dtype=np.int64)
    psi = rng.standard_normal(basis.dimension)
    psi /= np.linalg.norm(psi)

    rows = []
    Hn, tn = timed(numpy_backend.sector_hamiltonian, masks, K, r, index, pi, pj)
    Dn, tdn = timed(numpy_backend.rdm2_from_vector, masks, psi, r, index, pi, pj)
    if _ckern is not None:
        Hc, tc = timed(_ckern.sector_hamiltonian, masks, K, r, index, pi, pj)
        Dc, tdc = timed(_ckern.rdm2_from_vector, masks, psi, r, index, pi, pj)
        assert np.allclose(Hc, Hn, atol=1e-12)
        assert np.allclose(Dc, Dn, atol=1e-12)
        rows.append(("hamiltonian", tn, tc))
        rows.append(("density", tdn, tdc))
    else:
        rows.append(("hamiltonian", tn, None))
        rows.append(("density", tdn, None))

    print("r=%d sector (%d,%d): %d determinants" % (r, na, nb, basis.dimension))
    for name, t_py, t_c in rows:
        if t_c is None:
            print("  %-12s numpy %8.1f ms   (extension not built)"
                  % (name, 1e3 * t_py))
        else:
            print("  %-12s numpy %8.1f ms   compiled %7.1f ms   speedup %5.1fx"
                  % (name, 1e3 * t_py, 1e3 * t_c, t_py / t_c))


def main():
    print("compiled extension available:", have_extension)
    for r, na, nb in ((8, 2, 2), (10, 3, 2), (12, 3, 3), (14, 4, 3)):
        bench_sector(r, na, nb)


if __name__ == "__main__":
    main()
