"""Kernel backend selection: compiled extension when available, numpy otherwise.

Set RDMCONE_NO_EXT=1 to force the pure-numpy backend (useful for timing
comparisons and for debugging suspected extension issues).
"""
import os

from . import numpy_backend

_force_numpy = os.environ.get("RDMCONE_NO_EXT", "").lower() in ("1", "true", "yes")
_ext = None
if not _force_numpy:
    try:
        from . import _ckern as _ext
    except ImportError:
        _ext = None

if _ext is not None:
    backend_name = "cython"
    sector_hamiltonian = _ext.sector_hamiltonian
    rdm2_from_vector = _ext.rdm2_from_vector
else:
    backend_name = "numpy"
    sector_hamiltonian = numpy_backend.sector_hamiltonian
    rdm2_from_vector = numpy_backend.rdm2_from_vector

have_extension = _ext is not None
