"""Pure-Python reference implementation of the determinant kernels.

Same call signatures as the compiled extension; selected automatically when
the extension is missing or RDMCONE_NO_EXT is set.
"""
import numpy as np


def _parity(mask, p):
    # sign picked up by moving an operator past the occupied orbitals below p
    return 1 - 2 * (bin(mask & ((1 << p) - 1)).count("1") & 1)


def sector_hamiltonian(masks, K, r, pair_index, pi, pj):
    """Dense sector Hamiltonian H[row, col] = <row| sum K[(ij),(kl)] a_i+ a_j+ a_l a_k |col>."""
    nd = len(masks)
    d = len(pi)
    index = {int(m): i for i, m in enumerate(masks)}
    H = np.zeros((nd, nd))
    Kv = np.asarray(K)
    for col in range(nd):
        m = int(masks[col])
        occ = [p for p in range(r) if m & (1 << p)]
        for oi in range(len(occ)):
            k = occ[oi]
            for oj in range(oi + 1, len(occ)):
                l = occ[oj]
                ph12 = _parity(m, k)
                m1 = m & ~(1 << k)
                ph12 *= _parity(m1, l)
                m2 = m1 & ~(1 << l)
                b = pair_index[k, l]
                for a in range(d):
                    i = pi[a]
                    j = pj[a]
                    if m2 & (1 << j):
                        continue
                    ph3 = _parity(m2, j)
                    m3 = m2 | (1 << j)
                    if m3 & (1 << i):
                        continue
                    ph4 = _parity(m3, i)
                    row = index.get(m3 | (1 << i))
                    if row is not None:
                        H[row, col] += ph12 * ph3 * ph4 * Kv[a, b]
    return H


def rdm2_from_vector(masks, psi, r, pair_index, pi, pj):
    """Packed 2-RDM D[(ij),(kl)] = <psi| a_i+ a_j+ a_l a_k |psi>."""
    nd = len(masks)
    d = len(pi)
    index = {int(m): i for i, m in enumerate(masks)}
    D = np.zeros((d, d))
    for col in range(nd):
        c = psi[col]
        if c == 0.0:
            continue
        m = int(masks[col])
        occ = [p for p in range(r) if m & (1 << p)]
        for oi in range(len(occ)):
            k = occ[oi]
            for oj in range(oi + 1, len(occ)):
                l = occ[oj]
                ph12 = _parity(m, k)
                m1 = m & ~(1 << k)
                ph12 *= _parity(m1, l)
                m2 = m1 & ~(1 << l)
                b = pair_index[k, l]
                for a in range(d):
                    i = pi[a]
                    j = pj[a]
                    if m2 & (1 << j):
                        continue
                    ph3 = _parity(m2, j)
                    m3 = m2 | (1 << j)
                    if m3 & (1 << i):
                        continue
                    ph4 = _parity(m3, i)
                    row = index.get(m3 | (1 << i))
                    if row is not None:
                        D[a, b] += psi[row] * c * ph12 * ph3 * ph4
    return D
