"""Build script: compiles the optional physics kernel extension.

The package works without the extension (a pure-Python kernel is selected
at import time), so compilation failures are non-fatal.
"""

from setuptools import Extension, setup

try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "tracepatterns.sim._kernel._native",
                ["src/tracepatterns/sim/_kernel/_native.pyx"],
                extra_compile_args=["-O2", "-ffp-contract=off"],
                optional=True,
            )
        ],
        language_level=3,
    )
except ImportError:
    ext_modules = []

setup(ext_modules=ext_modules)
