"""Build script for the optional compiled quantile-regression kernel.

The package works without the extension: the solver falls back to a pure
numpy implementation of the same pivoting rules. Building is skipped when
Cython or a C toolchain is unavailable.
"""

from setuptools import setup

ext_modules = []
try:
    import numpy
    from Cython.Build import cythonize
    from setuptools import Extension

    ext_modules = cythonize(
        [
            Extension(
                "panelmix.quantile._simplex",
                ["src/panelmix/quantile/_simplex.pyx"],
                include_dirs=[numpy.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                extra_compile_args=["-O3"],
            )
        ],
        language_level=3,
    )
except ImportError:
    pass

setup(ext_modules=ext_modules)
