"""Kernel backend selection.

The hot inner loop (per-element ket rewriting) has two interchangeable
implementations: a compiled Cython extension (``_ext``) and a pure-Python
fallback (``_py``).  The compiled one is preferred when importable; set
``FREQGUARD_KERNELS=py`` or ``=ext`` to force a choice at import time, or
call :func:`use_backend` to switch at runtime (used by the benchmark and
the backend-agreement tests).

Both backends implement the same functions with bit-identical results;
callers access them as attributes of this module so a switch takes effect
immediately.
"""

from __future__ import annotations

import os

from . import _py

_FUNCTIONS = (
    "canonicalize",
    "route_pol",
    "flip_pol",
    "shift_freq",
    "route_freq",
    "phase_on_path",
    "delay_path",
    "split_bs",
    "pol_unitary",
    "bins_on_path",
    "norm_sq",
    "inner",
)

NO_PATH = _py.NO_PATH

try:
    from . import _ext
except ImportError:
    _ext = None

backend_name = ""


def available_backends() -> tuple[str, ...]:
    return ("py", "ext") if _ext is not None else ("py",)


def use_backend(name: str) -> None:
    """Point the module-level kernel functions at the named backend."""
    global backend_name
    if name == "ext":
        if _ext is None:
            raise ImportError("compiled kernel backend is not available")
        impl = _ext
    elif name == "py":
        impl = _py
    else:
        raise ValueError(f"unknown kernel backend {name!r} (expected 'py' or 'ext')")
    for fn in _FUNCTIONS:
        globals()[fn] = getattr(impl, fn)
    backend_name = name


_requested = os.environ.get("FREQGUARD_KERNELS", "auto")
if _requested == "auto":
    use_backend("ext" if _ext is not None else "py")
else:
    use_backend(_requested)
