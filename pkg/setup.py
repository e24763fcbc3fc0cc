"""Build script: compiles the optional Philox block-fill extension.

The package works without the extension (a vectorized numpy fallback is
selected at import time), so a failed compile only costs speed. Set
JOINTTAILS_NO_EXT=1 to skip the compile step entirely.
"""

import os
import sys

from setuptools import Extension, setup

ext_modules = []
if not os.environ.get("JOINTTAILS_NO_EXT"):
    try:
        import numpy
        from Cython.Build import cythonize

        ext_modules = cythonize(
            [
                Extension(
                    "jointtails._philox_cy",
                    sources=["src/jointtails/_philox_cy.pyx"],
                    include_dirs=[numpy.get_include()],
                    extra_compile_args=["-O3"],
                    define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                )
            ],
            compiler_directives={"language_level": 3},
        )
    except Exception as exc:  # pragma: no cover - build environment dependent
        sys.stderr.write(
            "jointtails: skipping compiled RNG kernel (%s); "
            "pure-Python backend will be used\n" % exc
        )
        ext_modules = []

setup(ext_modules=ext_modules)
