"""Build the optional compiled kernel core.

The package works without it: ``dunklpw._backend`` falls back to the
numpy implementation when ``dunklpw._ckernel`` cannot be imported.
"""

import os
import sys

from setuptools import setup
from setuptools.command.build_ext import build_ext


class OptionalBuildExt(build_ext):
    def run(self):
        try:
            super().run()
        except Exception as exc:  # compiler missing or broken
            print(f"warning: compiled core not built ({exc}); using numpy fallback",
                  file=sys.stderr)

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:
            print(f"warning: {ext.name} not built ({exc}); using numpy fallback",
                  file=sys.stderr)


def extensions():
    if os.environ.get("DUNKLPW_PURE_PYTHON"):
        return []
    try:
        import numpy as np
        from Cython.Build import cythonize
        from setuptools import Extension
    except ImportError:
        return []
    openmp = [] if os.environ.get("DUNKLPW_NO_OPENMP") else ["-fopenmp"]
    ext = Extension(
        "dunklpw._ckernel",
        ["src/dunklpw/_ckernel.pyx"],
        include_dirs=[np.get_include()],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
        extra_compile_args=["-O3", "-fcx-limited-range"] + openmp,
        extra_link_args=openmp,
    )
    return cythonize([ext], compiler_directives={"language_level": "3"})


setup(ext_modules=extensions(), cmdclass={"build_ext": OptionalBuildExt})
