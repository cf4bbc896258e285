"""Build script for the optional compiled Haar kernels.

The package is fully functional without the extension (a vectorized numpy
backend is selected at import when the compiled module is missing), so any
failure to cythonize or compile downgrades to a pure-Python install instead
of aborting.
"""
import sys

from setuptools import setup

ext_modules = []
try:
    import numpy
    from Cython.Build import cythonize
    from setuptools import Extension

    ext_modules = cythonize(
        [
            Extension(
                "specevo.wavelet._haar_cy",
                ["src/specevo/wavelet/_haar_cy.pyx"],
                include_dirs=[numpy.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                extra_compile_args=["-O3"],
            )
        ],
        compiler_directives={"language_level": "3"},
    )
except Exception as exc:  # noqa: BLE001 - any build-chain problem means "no extension"
    print(f"specevo: skipping compiled Haar kernels ({exc})", file=sys.stderr)
    ext_modules = []

setup(ext_modules=ext_modules)
