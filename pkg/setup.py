import numpy
from Cython.Build import cythonize
from setuptools import Extension, setup

# The compiled kernels are optional: if the extension fails to build, the
# package falls back to the pure-numpy implementations at import time.
extensions = [
    Extension(
        "qmskit._kernels",
        ["src/qmskit/_kernels.pyx"],
        include_dirs=[numpy.get_include()],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
        extra_compile_args=["-O3"],
        optional=True,
    )
]

setup(
    ext_modules=cythonize(
        extensions,
        compiler_directives={"language_level": "3"},
    )
)
