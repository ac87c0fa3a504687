# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled determinant kernels: sector Hamiltonian build and 2-RDM assembly.

Bit conventions match the numpy backend exactly: orbital p occupies bit p,
fermionic phase is the parity of the occupied bits below the acted orbital,
determinant lookup is binary search over the ascending mask array.
"""
import numpy as np

cimport cython
cimport numpy as cnp

ctypedef cnp.int64_t i64
ctypedef cnp.float64_t f64


cdef inline int _parity(i64 mask, int p) noexcept nogil:
    cdef i64 low = mask & ((<i64>1 << p) - 1)
    cdef int c = 0
    while low:
        low &= low - 1
        c += 1
    return 1 - 2 * (c & 1)


cdef inline Py_ssize_t _find(const i64[::1] masks, i64 m) noexcept nogil:
    cdef Py_ssize_t lo = 0, hi = masks.shape[0] - 1, mid
    while lo <= hi:
        mid = (lo + hi) >> 1
        if masks[mid] == m:
            return mid
        elif masks[mid] < m:
            lo = mid + 1
        else:
            hi = mid - 1
    return -1


def sector_hamiltonian(const i64[::1] masks, const f64[:, ::1] K, int r,
                       const i64[:, ::1] pair_index,
                       const i64[::1] pi, const i64[::1] pj):
    cdef Py_ssize_t nd = masks.shape[0]
    cdef Py_ssize_t d = pi.shape[0]
    H_arr = np.zeros((nd, nd))
    cdef f64[:, ::1] H = H_arr
    cdef int occ[64]
    cdef int nocc, oi, oj, k, l, i, j, ph12, ph
    cdef Py_ssize_t col, row, a, b
    cdef i64 m, m1, m2, m3, bitj, biti
    with nogil:
        for col in range(nd):
            m = masks[col]
            nocc = 0
            for k in range(r):
                if m & (<i64>1 << k):
                    occ[nocc] = k
                    nocc += 1
            for oi in range(nocc):
                k = occ[oi]
                for oj in range(oi + 1, nocc):
                    l = occ[oj]
                    ph12 = _parity(m, k)
                    m1 = m & ~(<i64>1 << k)
                    ph12 *= _parity(m1, l)
                    m2 = m1 & ~(<i64>1 << l)
                    b = pair_index[k, l]
                    for a in range(d):
                        i = <int>pi[a]
                        j = <int>pj[a]
                        bitj = <i64>1 << j
                        if m2 & bitj:
                            continue
                        ph = ph12 * _parity(m2, j)
                        m3 = m2 | bitj
                        biti = <i64>1 << i
                        if m3 & biti:
                            continue
                        ph *= _parity(m3, i)
                        row = _find(masks, m3 | biti)
                        if row >= 0:
                            H[row, col] += ph * K[a, b]
    return H_arr


def rdm2_from_vector(const i64[::1] masks, const f64[::1] psi, int r,
                     const i64[:, ::1] pair_index,
                     const i64[::1] pi, const i64[::1] pj):
    cdef Py_ssize_t nd = masks.shape[0]
    cdef Py_ssize_t d = pi.shape[0]
    D_arr = np.zeros((d, d))
    cdef f64[:, ::1] D = D_arr
    cdef int occ[64]
    cdef int nocc, oi, oj, k, l, i, j, ph12, ph
    cdef Py_ssize_t col, row, a, b
    cdef i64 m, m1, m2, m3, bitj, biti
    cdef f64 c
    with nogil:
        for col in range(nd):
            c = psi[col]
            if c == 0.0:
                continue
            m = masks[col]
            nocc = 0
            for k in range(r):
                if m & (<i64>1 << k):
                    occ[nocc] = k
                    nocc += 1
            for oi in range(nocc):
                k = occ[oi]
                for oj in range(oi + 1, nocc):
                    l = occ[oj]
                    ph12 = _parity(m, k)
                    m1 = m & ~(<i64>1 << k)
                    ph12 *= _parity(m1, l)
                    m2 = m1 & ~(<i64>1 << l)
                    b = pair_index[k, l]
                    for a in range(d):
                        i = <int>pi[a]
                        j = <int>pj[a]
                        bitj = <i64>1 << j
                        if m2 & bitj:
                            continue
                        ph = ph12 * _parity(m2, j)
                        m3 = m2 | bitj
                        biti = <i64>1 << i
                        if m3 & biti:
                            continue
                        ph *= _parity(m3, i)
                        row = _find(masks, m3 | biti)
                        if row >= 0:
                            D[a, b] += psi[row] * c * ph
    return D_arr
