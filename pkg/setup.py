"""Build script for the optional compiled compositing kernel.

The package works without the extension (a numpy fallback is selected at
import time); building with Cython just makes bulk dataset generation faster.
"""

from setuptools import Extension, setup

try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "peginhole._compose",
                ["src/peginhole/_compose.pyx"],
                extra_compile_args=["-O3"],
            )
        ],
        compiler_directives={"language_level": "3"},
    )
except ImportError:
    ext_modules = []

setup(ext_modules=ext_modules)
