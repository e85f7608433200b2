from setuptools import Extension, setup
from Cython.Build import cythonize

setup(
    ext_modules=cythonize(
        [Extension("tractorsuper._kernels", ["src/tractorsuper/_kernels.pyx"])],
        compiler_directives={"language_level": "3"},
    ),
)
