"""Build script for the compiled kernel extension.

The package works without the extension (a numpy/scipy fallback is selected
at import time), so a failed compile degrades performance, not correctness.
"""

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class OptionalBuildExt(build_ext):
    """Build the Cython core if possible; fall back to pure Python otherwise."""

    def run(self):
        try:
            super().run()
        except Exception as exc:  # compiler or Cython missing
            print(f"warning: compiled kernels skipped ({exc}); "
                  "pure-Python fallback will be used")

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:
            print(f"warning: building {ext.name} failed ({exc}); "
                  "pure-Python fallback will be used")


def make_extensions():
    try:
        from Cython.Build import cythonize
    except ImportError:
        return []
    ext = Extension(
        "softtext._kernels._core",
        ["src/softtext/_kernels/_core.pyx"],
        # -ffp-contract=off keeps float results bit-identical to the numpy
        # fallback (no FMA contraction), which the determinism tests rely on.
        extra_compile_args=["-O3", "-ffp-contract=off"],
    )
    return cythonize([ext], compiler_directives={"language_level": "3"})


setup(
    ext_modules=make_extensions(),
    cmdclass={"build_ext": OptionalBuildExt},
)
