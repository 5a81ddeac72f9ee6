from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext

try:
    from Cython.Build import cythonize
except ImportError:
    cythonize = None


class OptionalBuildExt(build_ext):
    """Build the compiled kernel when possible.

    The package selects the pure-Python kernel at import time if the
    extension is missing, so a failed build is a slowdown, not an error.
    """

    def run(self):
        try:
            super().run()
        except Exception as exc:
            print(f"skipping compiled kernel build: {exc}")

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:
            print(f"skipping compiled kernel {ext.name}: {exc}")


extensions = [
    Extension("factorcount._edgecore", ["src/factorcount/_edgecore.pyx"]),
]

setup(
    ext_modules=cythonize(extensions) if cythonize else [],
    cmdclass={"build_ext": OptionalBuildExt},
)
