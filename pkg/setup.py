"""Build script.

The compiled kernel core is optional: if Cython or a C compiler is missing the
package installs anyway and falls back to the numpy kernel implementations at
import time.  Set CTNS_NO_EXT=1 to skip the extension build explicitly.
"""

import os

from setuptools import Extension, setup

ext_modules = []
if os.environ.get("CTNS_NO_EXT") != "1":
    try:
        import numpy
        from Cython.Build import cythonize

        ext = Extension(
            "ctns._kernels._core",
            ["src/ctns/_kernels/_core.pyx"],
            include_dirs=[numpy.get_include()],
            # -ffp-contract=off keeps elementwise kernels bit-identical to the
            # numpy fallback (no fused multiply-add reassociation).
            extra_compile_args=["-O3", "-ffp-contract=off"],
            define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
        )
        ext_modules = cythonize([ext], language_level="3")
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules)
