"""Build glue for the optional compiled ensemble kernel.

The package is fully functional without the extension; corrnoise._kernels
falls back to the vectorized numpy backend when the import fails.
"""

import numpy
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize

    extensions = cythonize(
        [
            Extension(
                "corrnoise._kernels.ensemble_cy",
                ["src/corrnoise/_kernels/ensemble_cy.pyx"],
                include_dirs=[numpy.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                extra_compile_args=["-O3"],
            )
        ],
        compiler_directives={"language_level": "3"},
    )
except ImportError:
    extensions = []

setup(ext_modules=extensions)
