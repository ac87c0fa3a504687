"""Build script with an optional compiled kernel extension.

The package works without the extension (a numpy fallback is selected at
import time); compilation failures therefore downgrade to a warning instead
of aborting the install.
"""
import sys

from setuptools import setup

ext_modules = []
try:
    import numpy as np
    from Cython.Build import cythonize

    ext_modules = cythonize(
        ["src/rdmcone/_kernels/_ckern.pyx"],
        compiler_directives={"language_level": "3"},
    )
    for ext in ext_modules:
        ext.include_dirs.append(np.get_include())
except Exception as exc:  # pragma: no cover - exercised only on broken toolchains
    sys.stderr.write(
        "rdmcone: compiled kernels unavailable (%s); "
        "installing with the pure-numpy backend\n" % exc
    )
    ext_modules = []

setup(ext_modules=ext_modules)
