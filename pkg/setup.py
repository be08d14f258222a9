import os

from setuptools import Extension, setup

ext_modules = []
if not os.environ.get("SKEWLIM_NO_EXT"):
    try:
        from Cython.Build import cythonize
    except ImportError:  # fall back to the pure-Python kernels
        pass
    else:
        ext_modules = cythonize(
            [Extension("skewlim._speedups", ["src/skewlim/_speedups.pyx"], extra_compile_args=["-O3"])],
            compiler_directives={"language_level": 3, "boundscheck": False, "wraparound": False},
        )

setup(ext_modules=ext_modules)
