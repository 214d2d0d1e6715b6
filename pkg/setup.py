"""Build script for the optional compiled kernel extension.

The package is fully functional without the extension (a pure-Python
kernel module is selected at import time when the compiled one is
missing), so a failed extension build downgrades to a warning instead
of aborting the install.
"""

import sys

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class OptionalBuildExt(build_ext):
    """Build the extension if possible, fall back to pure Python otherwise."""

    def run(self):
        try:
            super().run()
        except Exception as exc:  # toolchain missing, compile error, ...
            print(
                f"warning: compiled kernels not built ({exc}); "
                "falling back to the pure-Python backend",
                file=sys.stderr,
            )

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:
            print(
                f"warning: building {ext.name} failed ({exc}); "
                "falling back to the pure-Python backend",
                file=sys.stderr,
            )


def extensions():
    try:
        from Cython.Build import cythonize
    except ImportError:
        print("warning: Cython not available, skipping compiled kernels", file=sys.stderr)
        return []
    ext = Extension(
        "freqguard._kernels._ext",
        ["src/freqguard/_kernels/_ext.pyx"],
        extra_compile_args=["-O3"],
    )
    return cythonize(
        [ext],
        compiler_directives={
            "language_level": "3",
            "boundscheck": False,
            "wraparound": False,
            "initializedcheck": False,
            "cdivision": True,
        },
    )


setup(ext_modules=extensions(), cmdclass={"build_ext": OptionalBuildExt})
