import os

from setuptools import Extension, setup


def extensions():
    if os.environ.get("SSOPT_NO_EXT"):
        return []
    try:
        from Cython.Build import cythonize
        import numpy as np
    except ImportError:
        return []
    ext = Extension(
        "ssopt._kernel",
        ["src/ssopt/_kernel.pyx"],
        include_dirs=[np.get_include()],
        # no FMA contraction: scores must match the Python kernel bit for bit
        extra_compile_args=["-O2", "-ffp-contract=off"],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
    )
    return cythonize([ext], compiler_directives={"language_level": "3"})


setup(ext_modules=extensions())
