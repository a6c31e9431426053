"""Build script: compiles the optional native kernels.

The package works without the extension (pure numpy fallback is selected at
import), but the compiled kernels are what make large point clouds
interactive, so the build fails loudly rather than silently skipping them.
Set NAR_SKIP_NATIVE=1 to install pure-Python only.
"""

import os

import numpy as np
from setuptools import setup
from setuptools.extension import Extension

ext_modules = []
if not os.environ.get("NAR_SKIP_NATIVE"):
    from Cython.Build import cythonize

    ext = Extension(
        "nar._kernels._native",
        ["src/nar/_kernels/_native.pyx"],
        include_dirs=[np.get_include()],
        # -ffp-contract=off keeps the float op sequence IEEE-identical to the
        # numpy fallback (no FMA fusion), which the determinism tests rely on.
        extra_compile_args=["-O3", "-ffp-contract=off"],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
    )
    ext_modules = cythonize([ext], language_level=3)

setup(ext_modules=ext_modules)
