"""Build script for the pybind11 extension; configuration lives in
pyproject.toml.  The extension compiles the complete C++ core plus the
binding translation unit against the in-tree headers and vendored
single-header libraries."""

import os

from pybind11.setup_helpers import Pybind11Extension, build_ext
from setuptools import setup

VENDOR = "vendor" if os.path.exists("vendor/json.hpp") else "/opt/vendor"

extension = Pybind11Extension(
    "lagrflow._core",
    sources=[
        "bindings/pymodule.cpp",
        "src/expr.cpp",
        "src/spatial.cpp",
        "src/temporal.cpp",
        "src/verify.cpp",
        "src/families.cpp",
    ],
    include_dirs=["include", VENDOR],
    cxx_std=20,
)

setup(ext_modules=[extension], cmdclass={"build_ext": build_ext})
