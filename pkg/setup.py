"""Build script: compiles the optional fast kernels.

The package works without the extension (a pure-Python fallback is selected
at import time), so any build failure here is non-fatal for development
installs -- but the default build does compile `loadreduce._kernels._fast`.
"""

import os

from setuptools import Extension, setup

PYX = "src/loadreduce/_kernels/_fast.pyx"

try:
    from Cython.Build import cythonize
except ImportError:  # no Cython available: install pure-Python only
    cythonize = None

if cythonize is not None and os.path.exists(PYX):
    ext_modules = cythonize(
        [
            Extension(
                "loadreduce._kernels._fast",
                [PYX],
                extra_compile_args=["-O3"],
            )
        ],
        language_level=3,
    )
else:
    ext_modules = []

setup(ext_modules=ext_modules)
