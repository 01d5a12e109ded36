import numpy
from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class optional_build_ext(build_ext):
    """Build the compiled kernels if possible; the package falls back to the
    pure-numpy implementation when the extension is unavailable."""

    def run(self):
        try:
            super().run()
        except Exception as exc:  # noqa: BLE001
            print(f"WARNING: compiled kernels not built ({exc}); "
                  "critcheck will use the pure-python backend")

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:  # noqa: BLE001
            print(f"WARNING: failed to compile {ext.name} ({exc}); "
                  "critcheck will use the pure-python backend")


try:
    from Cython.Build import cythonize
    extensions = cythonize(
        [Extension(
            "critcheck._kernels",
            ["src/critcheck/_kernels.pyx"],
            include_dirs=[numpy.get_include()],
            # -ffp-contract=off: the pure backend must produce bit-identical
            # pixel output, so FMA contraction has to stay disabled.
            extra_compile_args=["-O2", "-ffp-contract=off"],
        )],
        language_level=3,
    )
except ImportError:
    extensions = []

setup(ext_modules=extensions, cmdclass={"build_ext": optional_build_ext})
