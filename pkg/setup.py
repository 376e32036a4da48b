import numpy
from setuptools import Extension, setup
from Cython.Build import cythonize

setup(
    ext_modules=cythonize(
        [
            Extension(
                "paritylab._kernels_c",
                ["src/paritylab/_kernels_c.pyx"],
                extra_compile_args=["-O3"],
                language="c",
                include_dirs=[numpy.get_include()],
            )
        ],
        language_level=3,
    )
)
