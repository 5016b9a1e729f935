import os

from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    cythonize = None

KERNEL_DIR = os.path.join("src", "rankineq", "_kernels")

ext_modules = []
if cythonize is not None and not os.environ.get("RANKINEQ_PURE_PYTHON"):
    ext_modules = cythonize(
        [
            Extension(
                "rankineq._kernels._ckernel",
                [os.path.join(KERNEL_DIR, "_ckernel.pyx")],
                include_dirs=[KERNEL_DIR],
                extra_compile_args=["-O3"],
                libraries=["gmp"],
            )
        ],
        compiler_directives={"language_level": "3"},
    )

setup(ext_modules=ext_modules)
