"""Backend selection for the compositing kernel.

The compiled Cython kernel is preferred when present; setting
``PEGINHOLE_PURE=1`` in the environment forces the numpy fallback.
``available_backends`` exposes every importable implementation so tests
and the benchmark can compare them.
"""

from __future__ import annotations

import os

from . import _compose_py


def available_backends() -> dict:
    backends = {"python": _compose_py.compose_scene}
    try:
        from . import _compose  # compiled extension, optional

        backends["native"] = _compose.compose_scene
    except ImportError:
        pass
    return backends


_backends = available_backends()
if os.environ.get("PEGINHOLE_PURE") or "native" not in _backends:
    BACKEND = "python"
else:
    BACKEND = "native"

compose_scene = _backends[BACKEND]
