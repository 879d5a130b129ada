"""Build the compiled core. The package falls back to numpy kernels without it."""

import numpy as np
from Cython.Build import cythonize
from setuptools import Extension, setup

extensions = [
    Extension(
        name="pa_coord._core._kernels",
        sources=["src/pa_coord/_core/_kernels.pyx"],
        include_dirs=[np.get_include()],
        extra_compile_args=["-O3"],
    )
]

setup(
    ext_modules=cythonize(extensions, language_level=3),
)
