"""Selects the compiled core when available, the numpy fallback otherwise.

Set PHSFD_BACKEND=python or PHSFD_BACKEND=compiled to force a choice;
forcing "compiled" raises if the extension was not built.
"""

import os

from . import _core_py

_forced = os.environ.get("PHSFD_BACKEND")

if _forced == "python":
    core = _core_py
elif _forced == "compiled":
    from . import _core as core  # noqa: F401  (ImportError is the message)
elif _forced is None:
    try:
        from . import _core as core
    except ImportError:
        core = _core_py
else:
    raise ValueError(f"PHSFD_BACKEND must be 'python' or 'compiled', got {_forced!r}")


def active_backend() -> str:
    """Name of the core in use: 'compiled' or 'python'."""
    return core.BACKEND_NAME
