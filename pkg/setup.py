import os

from setuptools import Extension, setup

ext_modules = []
if os.environ.get("BYKOV_NO_EXT", "") in ("", "0"):
    try:
        from Cython.Build import cythonize
        import numpy as np
    except ImportError:
        pass
    else:
        ext_modules = cythonize(
            [
                Extension(
                    "bykov._ckernels",
                    ["src/bykov/_ckernels.pyx"],
                    include_dirs=[np.get_include()],
                    extra_compile_args=["-O3", "-ffp-contract=off"],
                )
            ],
            compiler_directives={"language_level": "3"},
        )

setup(ext_modules=ext_modules)
