"""Build script: compiles the optional sparse-math kernel extension.

The package works without the extension (a pure-Python fallback is selected
at import time), so a failed compile only costs speed. Set NLINSTRUCT_NO_EXT=1
to skip compilation entirely.
"""

import os

from setuptools import setup

ext_modules = []
if not os.environ.get("NLINSTRUCT_NO_EXT"):
    try:
        from Cython.Build import cythonize

        ext_modules = cythonize(
            ["src/nlinstruct/_ckernels.pyx"],
            language_level=3,
        )
    except ImportError:
        pass

setup(ext_modules=ext_modules)
