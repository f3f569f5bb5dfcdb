"""Build script for the optional compiled kernels.

The Cython extension is optional: when it cannot be compiled the package
falls back to the pure-Python kernels in ``cdm._kernels_py``.
"""
import os
import sys

from setuptools import setup
from setuptools.command.build_ext import build_ext


class optional_build_ext(build_ext):
    def run(self):
        try:
            super().run()
        except Exception as exc:  # noqa: BLE001
            sys.stderr.write(f"warning: compiled kernels not built ({exc}); using pure Python\n")

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:  # noqa: BLE001
            sys.stderr.write(f"warning: failed to build {ext.name} ({exc})\n")


def extensions():
    if os.environ.get("CDM_NO_EXTENSION"):
        return []
    try:
        import numpy as np
        from Cython.Build import cythonize
        from setuptools import Extension
    except ImportError:
        return []
    ext = Extension(
        "cdm._kernels",
        ["src/cdm/_kernels.pyx"],
        include_dirs=[np.get_include()],
        extra_compile_args=["-O3"],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
    )
    return cythonize(
        [ext],
        compiler_directives={
            "language_level": "3",
            "boundscheck": False,
            "wraparound": False,
            "cdivision": True,
            "initializedcheck": False,
        },
    )


setup(ext_modules=extensions(), cmdclass={"build_ext": optional_build_ext})
