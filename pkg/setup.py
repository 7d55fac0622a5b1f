"""Builds the optional compiled regression kernels.

The package works without the extension (a numpy fallback is selected at
import time); set MIXEDCAUSAL_NO_EXT=1 to skip compilation entirely.
"""

import os

from setuptools import setup

if os.environ.get("MIXEDCAUSAL_NO_EXT") == "1":
    ext_modules = []
else:
    import numpy
    from Cython.Build import cythonize
    from setuptools import Extension

    ext_modules = cythonize(
        [
            Extension(
                "mixedcausal._kernels._core",
                sources=["src/mixedcausal/_kernels/_core.pyx"],
                include_dirs=[numpy.get_include()],
                extra_compile_args=["-O3"],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        compiler_directives={"language_level": "3"},
    )

setup(ext_modules=ext_modules)
