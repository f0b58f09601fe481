import os

from setuptools import setup

ext_modules = []
if not os.environ.get("CDSITE_PURE_BUILD"):
    try:
        from Cython.Build import cythonize

        ext_modules = cythonize(
            ["src/cdsite/_kernels.pyx"], language_level=3, annotate=False
        )
    except ImportError:
        # fall back to the pure-Python kernels; the package selects at import
        ext_modules = []

setup(ext_modules=ext_modules)
