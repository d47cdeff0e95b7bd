"""Build script: compiles the optional shell-summation extension.

The package works without the extension (a numpy fallback is selected at
import time), so a failed compile only costs speed.  Set QGAS_NO_EXT=1 to
skip the build entirely.
"""

import os

from setuptools import setup

ext_modules = []
if not os.environ.get("QGAS_NO_EXT"):
    try:
        import numpy
        from Cython.Build import cythonize
        from setuptools import Extension

        ext = Extension(
            "qgas._shellsum",
            sources=["src/qgas/_shellsum.pyx"],
            include_dirs=[numpy.get_include()],
            define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
        )
        ext_modules = cythonize([ext], language_level="3")
    except Exception as exc:  # pragma: no cover - build-env dependent
        print(f"qgas: skipping compiled kernels ({exc}); numpy fallback will be used")

setup(ext_modules=ext_modules)
