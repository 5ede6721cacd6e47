"""Kernel backend selection.

The solver's inner loops (row convolutions, lagged correlations, batched
tridiagonal solves) dominate runtime, so they exist twice: a Cython
extension (``_native``) and a pure-numpy fallback (``_py_kernels``).
The compiled backend is preferred when importable; set ``DEREV_BACKEND``
to ``python`` or ``cython`` to force one. ``benchmarks/backend_bench.py``
compares the two.
"""

import os

from . import _py_kernels

_FORCED = os.environ.get("DEREV_BACKEND", "auto").strip().lower()
if _FORCED not in ("auto", "cython", "python"):
    raise ImportError(
        f"DEREV_BACKEND must be 'auto', 'cython' or 'python', got {_FORCED!r}"
    )

_ext = None
if _FORCED in ("auto", "cython"):
    try:
        from . import _native as _ext
    except ImportError:
        if _FORCED == "cython":
            raise ImportError(
                "DEREV_BACKEND=cython but the compiled extension is not "
                "available; reinstall the package or use DEREV_BACKEND=python"
            ) from None

_impl = _ext if _ext is not None else _py_kernels

BACKEND = _impl.BACKEND_NAME
conv_rows = _impl.conv_rows
corr_short = _impl.corr_short
corr_long = _impl.corr_long
thomas_rows = _impl.thomas_rows
place_pulses = _impl.place_pulses

KERNEL_NAMES = ("conv_rows", "corr_short", "corr_long", "thomas_rows", "place_pulses")


def available_backends():
    """Names of the kernel backends importable in this environment."""
    names = ["python"]
    try:
        from . import _native  # noqa: F401
    except ImportError:
        pass
    else:
        names.append("cython")
    return names


def get_backend(name):
    """Return the kernel module for ``name`` ('python' or 'cython')."""
    if name == "python":
        return _py_kernels
    if name == "cython":
        from . import _native
        return _native
    raise ValueError(f"unknown backend {name!r}")
