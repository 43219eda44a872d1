"""Backend selection for the hot kernels.

The compiled extension is used when it imports; ``HYPERSQG_PURE=1`` forces
the numpy fallback.  ``BACKEND`` names the active one.
"""
from __future__ import annotations

import os

from . import _kernels_py

if os.environ.get("HYPERSQG_PURE", "") not in ("", "0"):
    _impl = _kernels_py
    BACKEND = "python"
else:
    try:
        from . import _kernels as _impl  # type: ignore[attr-defined]

        BACKEND = "compiled"
    except ImportError:
        _impl = _kernels_py
        BACKEND = "python"

section_integrals = _impl.section_integrals
python_section_integrals = _kernels_py.section_integrals


def compiled_available() -> bool:
    try:
        from . import _kernels  # noqa: F401
    except ImportError:
        return False
    return True
