"""Build script for the optional compiled recurrent-sequence kernels.

The package works without the extension (a pure-numpy backend is selected
at import time), so any failure to cythonize or compile downgrades to a
source-only install instead of aborting.
"""

import sys

from setuptools import setup
from setuptools.command.build_ext import build_ext


def _extensions():
    try:
        from Cython.Build import cythonize
    except ImportError:
        print("gasseg: Cython not available, building without compiled kernels",
              file=sys.stderr)
        return []
    from setuptools import Extension

    ext = Extension(
        "gasseg.kernels._seqcore",
        ["src/gasseg/kernels/_seqcore.pyx"],
        extra_compile_args=["-O3", "-funroll-loops"],
    )
    return cythonize([ext], language_level="3")


class optional_build_ext(build_ext):
    """Swallow compiler failures; the numpy backend covers for the extension."""

    def run(self):
        try:
            super().run()
        except Exception as exc:  # CompileError, missing toolchain, ...
            print(f"gasseg: compiled kernels skipped ({exc})", file=sys.stderr)

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:
            print(f"gasseg: building {ext.name} failed ({exc}); "
                  "falling back to the pure-python backend", file=sys.stderr)


setup(
    ext_modules=_extensions(),
    cmdclass={"build_ext": optional_build_ext},
)
