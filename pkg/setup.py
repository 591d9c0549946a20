import numpy
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:  # the NumPy fallback is used at run time
    ext_modules = []
else:
    ext_modules = cythonize(
        [Extension("roughhopf._kernels", ["src/roughhopf/_kernels.pyx"],
                   include_dirs=[numpy.get_include()], extra_compile_args=["-O3"],
                   define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")])],
        compiler_directives={"language_level": "3"},
    )

setup(ext_modules=ext_modules)
