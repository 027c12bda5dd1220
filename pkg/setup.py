from setuptools import Extension, setup

try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "activetest._kernel",
                ["src/activetest/_kernel.pyx"],
                extra_compile_args=["-O3"],
            )
        ],
        compiler_directives={"language_level": "3"},
    )
except ImportError:
    # Pure-Python fallback in activetest._kernel_py is used at import time.
    ext_modules = []

setup(ext_modules=ext_modules)
