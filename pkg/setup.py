import numpy
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    cythonize = None

# -ffp-contract=off keeps the compiled kernels bit-compatible with the
# NumPy fallback (no FMA contraction of a*b+c).
extensions = []
if cythonize is not None:
    extensions = cythonize(
        [
            Extension(
                "dqfe._speedups",
                ["src/dqfe/_speedups.pyx"],
                include_dirs=[numpy.get_include()],
                extra_compile_args=["-O3", "-ffp-contract=off"],
            )
        ],
        language_level=3,
    )

setup(ext_modules=extensions)
