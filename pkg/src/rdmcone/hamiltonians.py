"""Integral ingestion and reduced-Hamiltonian assembly.

Sources are FCIDUMP files (chemist-notation spatial integrals) or generated
Hubbard chains.  The two-particle reduced Hamiltonian K is assembled over
r = 2*norb spin orbitals with interleaved ordering: spatial p maps to spin
orbitals 2p (alpha) and 2p+1 (beta).  The one-body embedding carries the
1/(N-1) factor so that Tr(K D) + core reproduces the FCI energy; that
invariant, not any printed formula, pins the convention.
"""
from __future__ import annotations

import io
import re
from dataclasses import dataclass, replace

import numpy as np

from .pairspace import PairBasis, PackedMatrix

_EIGHTFOLD = (
    (0, 1, 2, 3), (1, 0, 2, 3), (0, 1, 3, 2), (1, 0, 3, 2),
    (2, 3, 0, 1), (3, 2, 0, 1), (2, 3, 1, 0), (3, 2, 1, 0),
)


@dataclass(frozen=True)
class IntegralSet:
    """Spatial-orbital integrals in chemist notation, plus system metadata."""

    norb: int
    n_electrons: int
    ms2: int
    core_energy: float
    h: np.ndarray
    V: np.ndarray

    def __post_init__(self):
        h = np.asarray(self.h, dtype=float)
        V = np.asarray(self.V, dtype=float)
        n = self.norb
        if h.shape != (n, n) or V.shape != (n, n, n, n):
            raise ValueError("integral arrays inconsistent with norb=%d" % n)
        if np.abs(h - h.T).max() > 1e-12 * max(1.0, np.abs(h).max()):
            raise ValueError("one-electron integrals not symmetric")
        scale = max(1.0, np.abs(V).max())
        for perm in _EIGHTFOLD[1:]:
            if np.abs(V - V.transpose(perm)).max() > 1e-12 * scale:
                raise ValueError("two-electron integrals break chemist eightfold symmetry")
        object.__setattr__(self, "h", h)
        object.__setattr__(self, "V", V)

    def with_electrons(self, n_electrons, ms2=None):
        return replace(self, n_electrons=n_electrons,
                       ms2=self.ms2 if ms2 is None else ms2)


@dataclass
class ReducedHamiltonian:
    """Packed two-particle reduced Hamiltonian with particle count and core shift."""

    K: PackedMatrix
    N: int
    core_energy: float

    @property
    def r(self):
        return self.K.basis.r

    @property
    def pair_trace(self):
        """Trace normalization of a matching 2-RDM, N(N-1)/2."""
        return self.N * (self.N - 1) / 2.0


def parse_fcidump(source) -> IntegralSet:
    """Parse an FCIDUMP stream, string, or path into an IntegralSet.

    Header keys NORB, NELEC, MS2 are honored; ORBSYM and ISYM are parsed and
    ignored.  Value lines are "x i j k l" with 1-based spatial indices:
    i j 0 0 is one-electron, 0 0 0 0 is the core energy, anything else is the
    chemist-notation integral (ij|kl) expanded to all eight permutations.
    """
    if hasattr(source, "read"):
        text = source.read()
    elif isinstance(source, str) and "\n" in source:
        text = source
    else:
        with open(source) as fh:
            text = fh.read()
    lines = text.splitlines()

    header_lines = []
    body_start = None
    for ln, raw in enumerate(lines):
        header_lines.append(raw)
        token = raw.strip().rstrip(",").upper()
        if token.endswith("&END") or token.endswith("/"):
            body_start = ln + 1
            break
    if body_start is None:
        raise ValueError("FCIDUMP header not terminated by &END or /")
    header = " ".join(header_lines)

    def header_int(key):
        m = re.search(r"%s\s*=\s*(-?\d+)" % key, header, re.IGNORECASE)
        return int(m.group(1)) if m else None

    norb = header_int("NORB")
    nelec = header_int("NELEC")
    if norb is None or nelec is None:
        raise ValueError("FCIDUMP header missing NORB or NELEC")
    ms2 = header_int("MS2")
    if ms2 is None:
        ms2 = nelec % 2

    h = np.zeros((norb, norb))
    V = np.zeros((norb, norb, norb, norb))
    core = 0.0
    for ln in range(body_start, len(lines)):
        stripped = lines[ln].strip()
        if not stripped:
            continue
        fields = stripped.split()
        if len(fields) != 5:
            raise ValueError("line %d: expected 'value i j k l', got %r" % (ln + 1, stripped))
        try:
            val = float(fields[0].replace("D", "E").replace("d", "e"))
            i, j, k, l = (int(x) for x in fields[1:])
        except ValueError:
            raise ValueError("line %d: malformed scalar or index in %r" % (ln + 1, stripped))
        for idx in (i, j, k, l):
            if idx < 0 or idx > norb:
                raise ValueError("line %d: orbital index %d out of range 1..%d"
                                 % (ln + 1, idx, norb))
        if i == j == k == l == 0:
            core = val
        elif k == 0 and l == 0:
            if i == 0 or j == 0:
                raise ValueError("line %d: one-electron entry needs two indices" % (ln + 1))
            h[i - 1, j - 1] = val
            h[j - 1, i - 1] = val
        else:
            if 0 in (i, j, k, l):
                raise ValueError("line %d: two-electron entry with zero index" % (ln + 1))
            q = (i - 1, j - 1, k - 1, l - 1)
            for perm in _EIGHTFOLD:
                V[q[perm[0]], q[perm[1]], q[perm[2]], q[perm[3]]] = val
    return IntegralSet(norb=norb, n_electrons=nelec, ms2=ms2,
                       core_energy=core, h=h, V=V)


def write_fcidump(ints: IntegralSet, target=None) -> str:
    """Serialize an IntegralSet deterministically (canonical order, 15 digits).

    Canonical two-electron representative: i>=j, k>=l, (i,j) >= (k,l); entries
    emitted in sorted index order, two-electron block first, then one-electron,
    then the core energy.  Returns the text; also writes to `target` (path or
    stream) when given.
    """
    n = ints.norb
    out = io.StringIO()
    out.write(" &FCI NORB=%d,NELEC=%d,MS2=%d,\n" % (n, ints.n_electrons, ints.ms2))
    out.write("  ORBSYM=" + "1," * n + "\n")
    out.write("  ISYM=1,\n")
    out.write(" &END\n")

    def emit(val, i, j, k, l):
        out.write("%.15E %4d %4d %4d %4d\n" % (val, i, j, k, l))

    for i in range(n):
        for j in range(i + 1):
            for k in range(i + 1):
                lmax = j if k == i else k
                for l in range(lmax + 1):
                    val = ints.V[i, j, k, l]
                    if val != 0.0:
                        emit(val, i + 1, j + 1, k + 1, l + 1)
    for i in range(n):
        for j in range(i + 1):
            if ints.h[i, j] != 0.0:
                emit(ints.h[i, j], i + 1, j + 1, 0, 0)
    if ints.core_energy != 0.0:
        emit(ints.core_energy, 0, 0, 0, 0)
    text = out.getvalue()
    if target is not None:
        if hasattr(target, "write"):
            target.write(text)
        else:
            with open(target, "w") as fh:
                fh.write(text)
    return text


def hubbard_chain(L: int, t: float, U: float, periodic: bool = False) -> IntegralSet:
    """Hubbard chain integrals: hopping -t on nearest-neighbor bonds, on-site U.

    Half filling (N = L) and the matching ms2 = L % 2 are set as defaults;
    use with_electrons to override.  The wrap bond of a 2-site ring would
    duplicate the open bond, so periodic is ignored for L = 2.
    """
    if L < 2:
        raise ValueError("hubbard_chain needs L >= 2 sites, got %d" % L)
    h = np.zeros((L, L))
    for i in range(L - 1):
        h[i, i + 1] = h[i + 1, i] = -t
    if periodic and L > 2:
        h[0, L - 1] = h[L - 1, 0] = -t
    V = np.zeros((L, L, L, L))
    for i in range(L):
        V[i, i, i, i] = U
    return IntegralSet(norb=L, n_electrons=L, ms2=L % 2, core_energy=0.0, h=h, V=V)


def spin_orbital_h(ints: IntegralSet) -> np.ndarray:
    """One-electron integrals expanded to r = 2*norb spin orbitals (interleaved)."""
    n = ints.norb
    hso = np.zeros((2 * n, 2 * n))
    hso[0::2, 0::2] = ints.h
    hso[1::2, 1::2] = ints.h
    return hso


def assemble_reduced_hamiltonian(ints: IntegralSet, N: int) -> ReducedHamiltonian:
    """Build the packed reduced Hamiltonian K for N particles.

    K[(ij),(kl)] = (h_ik d_jl + h_jl d_ik - h_il d_jk - h_jk d_il)/(N-1)
                   + <ij||kl>
    over spin orbitals, with <ij||kl> the antisymmetrized two-electron
    integral from the chemist-notation spatial V.
    """
    if N <= 1:
        raise ValueError("reduced Hamiltonian undefined for N <= 1 (1/(N-1) embedding)")
    r = 2 * ints.norb
    if N > r:
        raise ValueError("N=%d exceeds the %d available spin orbitals" % (N, r))
    basis = PairBasis(r)
    hso = spin_orbital_h(ints)
    V = ints.V

    def phys(i, j, k, l):
        # <ij|kl> in physicist notation = chemist (ik|jl), gated by spin match
        if (i ^ k) & 1 or (j ^ l) & 1:
            return 0.0
        return V[i >> 1, k >> 1, j >> 1, l >> 1]

    d = basis.dim
    K = np.zeros((d, d))
    pi, pj = basis.pi, basis.pj
    inv = 1.0 / (N - 1)
    for a in range(d):
        i, j = pi[a], pj[a]
        for b in range(a, d):
            k, l = pi[b], pj[b]
            val = phys(i, j, k, l) - phys(i, j, l, k)
            one = 0.0
            if j == l:
                one += hso[i, k]
            if i == k:
                one += hso[j, l]
            if j == k:
                one -= hso[i, l]
            if i == l:
                one -= hso[j, k]
            val += inv * one
            K[a, b] = val
            K[b, a] = val
    return ReducedHamiltonian(K=PackedMatrix(basis, K), N=N,
                              core_energy=ints.core_energy)
