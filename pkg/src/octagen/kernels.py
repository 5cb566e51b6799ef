"""Select the compiled kernels when built, otherwise the pure-Python ones.

Set ``OCTAGEN_PURE=1`` to force the fallback.
"""

import os

BACKEND = "python"

if not os.environ.get("OCTAGEN_PURE"):
    try:
        from octagen._ckernels import corner_orbit, corner_search, trace  # noqa: F401

        BACKEND = "cython"
    except ImportError:
        pass

if BACKEND == "python":
    from octagen._pykernels import corner_orbit, corner_search, trace  # noqa: F401
