import os

from setuptools import Extension, setup

# The compiled kernels are optional: the package falls back to the numpy
# implementations in cespdc._kernels._slow when the extension is absent.
ext_modules = []
if not os.environ.get("CESPDC_NO_EXT"):
    try:
        import numpy
        from Cython.Build import cythonize

        ext_modules = cythonize(
            [
                Extension(
                    "cespdc._kernels._fast",
                    ["src/cespdc/_kernels/_fast.pyx"],
                    include_dirs=[numpy.get_include()],
                    define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                    extra_compile_args=["-O3"],
                )
            ],
            compiler_directives={
                "language_level": 3,
                "boundscheck": False,
                "wraparound": False,
                "cdivision": True,
            },
        )
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules)
