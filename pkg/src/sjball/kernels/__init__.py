"""Hot assembly kernels with two interchangeable back ends.

The loop back end is compiled with numba when it is importable; the
vectorized back end is plain numpy. ``SJB_NUMBA=0`` forces numpy, any other
value (or unset) uses numba when available.
"""

import os

from . import vectorized

try:  # pragma: no cover - depends on the environment
    import numba  # noqa: F401

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    HAVE_NUMBA = False


def _flag_enabled() -> bool:
    value = os.environ.get("SJB_NUMBA", "1").strip().lower()
    return value not in ("0", "false", "no", "off", "")


def backend_name() -> str:
    """Name of the back end selected by the environment, ``"numba"`` or ``"numpy"``."""
    return "numba" if HAVE_NUMBA and _flag_enabled() else "numpy"


def get_backend(name: str | None = None):
    """Return the kernel module for ``name`` (default: environment choice)."""
    name = backend_name() if name is None else name
    if name == "numpy":
        return vectorized
    if name == "numba":
        if not HAVE_NUMBA:
            raise ImportError("numba is not installed")
        from . import loops

        return loops
    raise ValueError(f"unknown backend {name!r}")
