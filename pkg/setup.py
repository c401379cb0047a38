"""Build script: compiles the optional Cython kernel core.

The package works without the extension (a pure NumPy/SciPy fallback is
selected at import time); building it just makes trajectory propagation,
the dense matrix exponential and the adaptive integrator faster.
"""

import numpy
from Cython.Build import cythonize
from setuptools import Extension, setup

setup(
    ext_modules=cythonize(
        [
            Extension(
                "vsys._kernels.native",
                ["src/vsys/_kernels/native.pyx"],
                extra_compile_args=["-O3"],
                include_dirs=[numpy.get_include()],
            )
        ],
        language_level=3,
    )
)
