"""Pure-Python (numpy) scene compositing kernel.

Must stay bit-identical to the compiled kernel in ``_compose.pyx``: same
double-precision disc test, same overlay order (backgrounds, disc in each
half-view, gripper mask).
"""

from __future__ import annotations

import numpy as np


def compose_scene(
    out: np.ndarray,
    bg_left: np.ndarray,
    bg_right: np.ndarray,
    mask: np.ndarray,
    cx1: float,
    cy1: float,
    cx2: float,
    cy2: float,
    radius: float,
    darkness: int,
    gripper: int,
) -> None:
    height, width = out.shape
    half = width // 2
    out[:, :half] = bg_left
    out[:, half:] = bg_right

    r2 = radius * radius
    rows = np.arange(height, dtype=np.float64)[:, None]
    cols = np.arange(width, dtype=np.float64)[None, :]
    for cx, cy in ((cx1, cy1), (cx2, cy2)):
        lo_r = max(0, int(np.floor(cy - radius)))
        hi_r = min(height, int(np.ceil(cy + radius)) + 1)
        lo_c = max(0, int(np.floor(cx - radius)))
        hi_c = min(width, int(np.ceil(cx + radius)) + 1)
        if lo_r >= hi_r or lo_c >= hi_c:
            continue
        d2 = (cols[:, lo_c:hi_c] - cx) ** 2 + (rows[lo_r:hi_r, :] - cy) ** 2
        patch = out[lo_r:hi_r, lo_c:hi_c]
        patch[d2 <= r2] = darkness

    out[mask == 0] = gripper
