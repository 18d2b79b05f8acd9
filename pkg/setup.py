"""Build script for the optional compiled Lanczos kernel.

The extension is a pure speed-up; the package falls back to the NumPy
implementation when the compiled module is absent.  Set SPINCD_NO_EXT=1
to skip the extension build entirely.
"""

import os

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class OptionalBuildExt(build_ext):
    """Build the extension if possible, warn and continue otherwise."""

    def run(self):
        try:
            super().run()
        except Exception as exc:  # missing compiler, broken toolchain
            self._warn(exc)

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:
            self._warn(exc)

    @staticmethod
    def _warn(exc):
        print(f"WARNING: compiled kernel skipped ({exc}); "
              "using the pure NumPy backend")


def extensions():
    if os.environ.get("SPINCD_NO_EXT"):
        return []
    try:
        import numpy
        from Cython.Build import cythonize
    except ImportError as exc:
        print(f"WARNING: compiled kernel skipped ({exc})")
        return []
    ext = Extension(
        "spincd.kernels._expm_cy",
        sources=["src/spincd/kernels/_expm_cy.pyx"],
        include_dirs=[numpy.get_include()],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
    )
    return cythonize([ext], compiler_directives={"language_level": "3"})


setup(ext_modules=extensions(), cmdclass={"build_ext": OptionalBuildExt})
