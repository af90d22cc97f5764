"""Builds the pybind11 extension through the project's CMake tree."""

import subprocess
import sys
from pathlib import Path

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class CMakeExtension(Extension):
    def __init__(self, name):
        super().__init__(name, sources=[])


class CMakeBuild(build_ext):
    def build_extension(self, ext):
        source_dir = Path(__file__).resolve().parent
        build_dir = Path(self.build_temp).resolve() / "cmake"
        build_dir.mkdir(parents=True, exist_ok=True)
        # The module must land next to the package __init__.
        dest_dir = Path(self.get_ext_fullpath(ext.name)).resolve().parent
        dest_dir.mkdir(parents=True, exist_ok=True)

        subprocess.run(
            [
                "cmake",
                "-S",
                str(source_dir),
                "-B",
                str(build_dir),
                "-DCMAKE_BUILD_TYPE=Release",
                "-DEVOCHAIN_BUILD_CLI=OFF",
                "-DEVOCHAIN_BUILD_TESTING=OFF",
                f"-DPython_EXECUTABLE={sys.executable}",
                f"-DEVOCHAIN_MODULE_DEST={dest_dir}",
            ],
            check=True,
        )
        subprocess.run(
            ["cmake", "--build", str(build_dir), "--target", "_core", "-j"],
            check=True,
        )
        subprocess.run(["cmake", "--install", str(build_dir)], check=True)


setup(
    ext_modules=[CMakeExtension("evochain._core")],
    cmdclass={"build_ext": CMakeBuild},
)
