"""Builds the optional compiled nearest-neighbor kernel.

The package works without it (a pure-Python backend is selected at import
time), so the extension is marked optional: missing Cython or a failing
compiler degrades to the fallback instead of breaking the install.
"""

import os

from setuptools import setup

ext_modules = []
if os.environ.get("FACEGEOM_NO_EXT") != "1":
    try:
        import numpy
        from Cython.Build import cythonize
        from setuptools import Extension

        ext_modules = cythonize(
            [
                Extension(
                    "facegeom._kdtree_c",
                    ["src/facegeom/_kdtree_c.pyx"],
                    include_dirs=[numpy.get_include()],
                    define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                )
            ],
            language_level="3",
        )
        for ext in ext_modules:
            ext.optional = True
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules)
