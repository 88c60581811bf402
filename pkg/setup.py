import os

from setuptools import Extension, setup

ext_modules = []
if os.environ.get("FRAISSE_NO_EXT") != "1":
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [Extension("fraisse._speedups", ["src/fraisse/_speedups.pyx"])],
        language_level=3,
    )

setup(ext_modules=ext_modules)
