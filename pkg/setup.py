"""Build script for the optional compiled core.

The Cython extension is optional; when it cannot be built the package
falls back to the pure-Python kernels at import time.
"""
import os
import sys

from setuptools import setup

ext_modules = []
if os.environ.get("DUALAVG_NO_EXT") != "1":
    try:
        import numpy
        from Cython.Build import cythonize
        from setuptools import Extension

        ext_modules = cythonize(
            [
                Extension(
                    "dualavg._core",
                    [os.path.join("src", "dualavg", "_core.pyx")],
                    include_dirs=[numpy.get_include()],
                    extra_compile_args=["-O3"],
                    define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                )
            ],
            language_level="3",
        )
    except Exception as exc:  # pragma: no cover - build environment dependent
        print(f"warning: compiled core not built ({exc}); using pure-Python kernels",
              file=sys.stderr)
        ext_modules = []

setup(ext_modules=ext_modules)
