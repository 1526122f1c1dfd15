import os

import numpy as np
from Cython.Build import cythonize
from setuptools import Extension, setup

# WEIGHTCASTER_NO_EXT=1 skips the compiled core; the numpy fallback is used.
if os.environ.get("WEIGHTCASTER_NO_EXT"):
    ext_modules = []
else:
    ext_modules = cythonize(
        [
            Extension(
                "weightcaster._kernels",
                ["src/weightcaster/_kernels.pyx"],
                include_dirs=[np.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                extra_compile_args=["-O3"],
            )
        ],
        compiler_directives={"language_level": "3", "embedsignature": True},
    )

setup(ext_modules=ext_modules)
