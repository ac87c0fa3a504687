"""Backend equivalence: the compiled determinant kernels against pure numpy.

Both implementations must produce bit-identical structure (same sparsity,
same phases) because they implement the same loop order; values are compared
to tight tolerance on random operators over several sectors.
"""
import numpy as np
import pytest

from rdmcone._kernels import backend_name, have_extension
from rdmcone._kernels import numpy_backend
from rdmcone.fci import determinant_basis
from rdmcone.pairspace import PairBasis

try:
    from rdmcone._kernels import _ckern
except ImportError:
    _ckern = None

needs_ext = pytest.mark.skipif(_ckern is None,
                               reason="compiled extension not built")


def _sector_inputs(r, na, nb, seed):
    basis = determinant_basis(r, na, nb)
    pb = PairBasis(r)
    rng = np.random.default_rng(seed)
    K = rng.standard_normal((pb.dim, pb.dim))
    K = 0.5 * (K + K.T)
    masks = np.ascontiguousarray(basis.masks, dtype=np.int64)
    index = np.ascontiguousarray(pb._index, dtype=np.int64)
    pi = np.ascontiguousarray(pb.pi, dtype=np.int64)
    pj = np.ascontiguousarray(pb.pj, dtype=np.int64)
    return basis, pb, K, masks, index, pi, pj


@needs_ext
@pytest.mark.parametrize("r,na,nb", [(4, 1, 1), (6, 2, 1), (8, 2, 2)])
def test_hamiltonian_backends_agree(r, na, nb):
    basis, pb, K, masks, index, pi, pj = _sector_inputs(r, na, nb, seed=r)
    Hc = _ckern.sector_hamiltonian(masks, K, r, index, pi, pj)
    Hn = numpy_backend.sector_hamiltonian(masks, K, r, index, pi, pj)
    assert Hc.shape == Hn.shape == (basis.dimension, basis.dimension)
    assert np.allclose(Hc, Hn, atol=1e-13)
    # same sparsity pattern, not just close values
    assert np.array_equal(Hc != 0.0, Hn != 0.0)


@needs_ext
@pytest.mark.parametrize("r,na,nb", [(4, 1, 1), (6, 2, 1), (8, 2, 2)])
def test_rdm_backends_agree(r, na, nb):
    basis, pb, K, masks, index, pi, pj = _sector_inputs(r, na, nb, seed=r + 50)
    rng = np.random.default_rng(7)
    psi = rng.standard_normal(basis.dimension)
    psi /= np.linalg.norm(psi)
    Dc = _ckern.rdm2_from_vector(masks, psi, r, index, pi, pj)
    Dn = numpy_backend.rdm2_from_vector(masks, psi, r, index, pi, pj)
    assert np.allclose(Dc, Dn, atol=1e-13)
    assert np.allclose(Dc, Dc.T, atol=1e-13)


def test_backend_selection_reporting():
    assert backend_name in ("cython", "numpy")
    assert have_extension == (backend_name == "cython")


def test_hamiltonian_is_symmetric():
    basis, pb, K, masks, index, pi, pj = _sector_inputs(6, 2, 1, seed=3)
    H = numpy_backend.sector_hamiltonian(masks, K, 6, index, pi, pj)
    assert np.allclose(H, H.T, atol=1e-13)


def test_rdm_pairs_with_operator_consistently():
    # <psi|H|psi> computed from the sector matrix must equal Tr(K D) with the
    # density from the same vector; this ties both kernels together
    basis, pb, K, masks, index, pi, pj = _sector_inputs(6, 2, 2, seed=11)
    rng = np.random.default_rng(13)
    psi = rng.standard_normal(basis.dimension)
    psi /= np.linalg.norm(psi)
    H = numpy_backend.sector_hamiltonian(masks, K, 6, index, pi, pj)
    D = numpy_backend.rdm2_from_vector(masks, psi, 6, index, pi, pj)
    assert psi @ H @ psi == pytest.approx(float(np.tensordot(K, D)), abs=1e-11)
