import numpy as np
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "impactreg._kernel",
                ["src/impactreg/_kernel.pyx"],
                include_dirs=[np.get_include()],
            )
        ],
        language_level=3,
    )
except ImportError:
    # Pure-python fallback is selected at import time when the extension
    # is unavailable, so a build without Cython is still functional.
    ext_modules = []

setup(ext_modules=ext_modules)
