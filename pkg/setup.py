"""Build script for the compiled integrator core.

The extension is optional at runtime: `kgphase.backends` falls back to the
pure-numpy implementation when the compiled module is absent.  Compiler flags
deliberately exclude -ffast-math and -march=native so the kernel's arithmetic
is IEEE-754 reproducible across machines.
"""
import numpy
from Cython.Build import cythonize
from setuptools import Extension, setup

extensions = [
    Extension(
        "kgphase.backends._core",
        ["src/kgphase/backends/_core.pyx"],
        include_dirs=[numpy.get_include()],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
        extra_compile_args=["-O3"],
    )
]

setup(ext_modules=cythonize(extensions, language_level=3))
