import os

from setuptools import Extension, setup

ext_modules = []
if not os.environ.get("EXPANDER_CS_NO_EXT"):
    try:
        from Cython.Build import cythonize

        ext_modules = cythonize(
            [
                Extension(
                    "expander_cs._kernels._speedups",
                    ["src/expander_cs/_kernels/_speedups.pyx"],
                    extra_compile_args=["-O3"],
                )
            ],
            compiler_directives={"language_level": "3"},
        )
    except ImportError:
        # No Cython available: install the pure-Python package only.
        # The kernels fall back automatically at import time.
        ext_modules = []

setup(ext_modules=ext_modules)
