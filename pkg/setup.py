"""Build script: compiles the optional acceleration kernels when Cython and a
C toolchain are available.  The package works without them (a pure-numpy
fallback is selected at import time), so a missing compiler downgrades to a
warning instead of failing the install."""

import sys

from setuptools import setup


def _extensions():
    try:
        import numpy as np
        from Cython.Build import cythonize
        from setuptools import Extension
    except ImportError as exc:
        print(f"lecturemap: skipping compiled kernels ({exc})", file=sys.stderr)
        return []
    ext = Extension(
        "lecturemap._accel._core",
        ["src/lecturemap/_accel/_core.pyx"],
        include_dirs=[np.get_include()],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
        extra_compile_args=["-O3"],
    )
    return cythonize([ext], compiler_directives={"language_level": "3"})


setup(ext_modules=_extensions())
