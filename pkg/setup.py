"""Build script: compiles the optional Cython mask kernels.

The package works without the extension (a NumPy fallback is selected at
import time), so any failure to cythonize or compile downgrades to a
pure-Python install instead of aborting.
"""

from setuptools import setup


def _extensions():
    try:
        from Cython.Build import cythonize
        from setuptools import Extension
    except ImportError:
        return []
    ext = Extension(
        "vqs.masks._kernels",
        sources=["src/vqs/masks/_kernels.pyx"],
    )
    try:
        return cythonize([ext], language_level="3")
    except Exception:
        return []


setup(ext_modules=_extensions())
