"""Build the optional compiled core.

The Cython extension ``nuggetgp._core`` is optional: when Cython or a C
compiler is unavailable the package installs without it and falls back to
the numpy implementation in ``nuggetgp._core_py``.
"""
import numpy as np
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:  # pragma: no cover
    ext_modules = []
else:
    ext_modules = cythonize(
        [
            Extension(
                "nuggetgp._core",
                ["src/nuggetgp/_core.pyx"],
                include_dirs=[np.get_include()],
                extra_compile_args=["-O3"],
                optional=True,
            )
        ],
        compiler_directives={"language_level": "3"},
    )

setup(ext_modules=ext_modules)
