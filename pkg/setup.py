import numpy as np
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize

    HAVE_CYTHON = True
except ImportError:
    HAVE_CYTHON = False

# The compiled kernels are an optional speedup. The package falls back to
# a NumPy implementation at import time if the extension is unavailable.
ext = Extension(
    "remvol._kernels",
    sources=["src/remvol/_kernels.pyx"],
    include_dirs=[np.get_include()],
    define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
    optional=True,
)

directives = {
    "boundscheck": False,
    "wraparound": False,
    "cdivision": True,
    "language_level": 3,
}

setup(
    ext_modules=cythonize([ext], compiler_directives=directives) if HAVE_CYTHON else [],
)
