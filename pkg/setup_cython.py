"""Build script for the compiled kernel core.

Usage:
    python setup_cython.py build_ext --inplace

The package works without this step (a pure-numpy fallback is selected at
import); building the extension speeds up the propagation loops several-fold.
Verify with:
    python -c "from tdqmc.kernels import backend_name; print(backend_name)"
"""

import numpy as np
from Cython.Build import cythonize
from setuptools import Extension, setup

extensions = [
    Extension(
        "tdqmc._kernels_cy",
        sources=["src/tdqmc/_kernels_cy.pyx"],
        include_dirs=[np.get_include()],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
        extra_compile_args=["-O3", "-fcx-limited-range", "-march=native"],
    ),
]

setup(
    name="tdqmc-cython-ext",
    ext_modules=cythonize(
        extensions,
        compiler_directives={
            "boundscheck": False,
            "wraparound": False,
            "cdivision": True,
            "language_level": "3",
        },
    ),
    package_dir={"": "src"},
)
