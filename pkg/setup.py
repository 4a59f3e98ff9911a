"""Build script for the optional compiled kernels.

The Cython extension is optional: when it cannot be compiled the package
falls back to the pure-Python implementation in ``qtraj._kernels_py``.
"""
import os

from setuptools import setup

ext_modules = []
if not os.environ.get("QTRAJ_NO_EXTENSION"):
    try:
        from Cython.Build import cythonize
        from setuptools import Extension

        ext_modules = cythonize(
            [
                Extension(
                    "qtraj._kernels",
                    ["src/qtraj/_kernels.pyx"],
                    extra_compile_args=["-O3"],
                )
            ],
            compiler_directives={"language_level": "3"},
        )
    except Exception as exc:  # pragma: no cover - build environment dependent
        print(f"qtraj: building without compiled kernels ({exc})")
        ext_modules = []

setup(ext_modules=ext_modules)
