"""Build script for the compiled kernel extension.

The package works without the extension (a numpy fallback is selected at
import time); set SPINBIAS_NO_EXT=1 to skip building it.
"""

import os

from setuptools import Extension, setup


def extensions():
    if os.environ.get("SPINBIAS_NO_EXT"):
        return []
    import numpy as np
    from Cython.Build import cythonize

    ext = Extension(
        "spinbias._core",
        ["src/spinbias/_core.pyx"],
        include_dirs=[np.get_include()],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
    )
    return cythonize([ext], language_level=3)


setup(ext_modules=extensions())
