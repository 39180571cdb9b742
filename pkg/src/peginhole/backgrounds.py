"""Procedural stand-ins for the six background categories plus light-plain.

Real deployments point the dataset manifest at directories of user-supplied
images; these generators exist so the repository is self-contained. Each
category imitates the character of its namesake: flat fields, stripes and
checkers, gradients with specular streaks, blob composites, and a mixed
grab-bag for the catch-all category.
"""

from __future__ import annotations

import numpy as np

from .image import GrayImage
from .seeding import child_rng

CATEGORY_NAMES = (
    "plain",
    "image",
    "textures",
    "metallic",
    "scenery",
    "food",
    "light_plain",
)

LIGHT_PLAIN_RANGE = (125, 255)


class BackgroundError(ValueError):
    pass


def _even_intensities(count: int, lo: int, hi: int) -> list[int]:
    if count == 1:
        return [(lo + hi) // 2]
    return [round(lo + (hi - lo) * i / (count - 1)) for i in range(count)]


def _plain(value: int, size: int) -> GrayImage:
    return GrayImage.filled(size, size, value)


def _textures(rng: np.random.Generator, size: int) -> GrayImage:
    a, b = sorted(rng.integers(15, 240, size=2).tolist())
    if b - a < 20:
        b = min(255, a + 20)
    period = int(rng.integers(6, 28))
    kind = rng.integers(0, 3)
    yy, xx = np.mgrid[0:size, 0:size]
    if kind == 0:      # vertical stripes
        field = (xx // period) % 2
    elif kind == 1:    # diagonal stripes
        field = ((xx + yy) // period) % 2
    else:              # checkerboard
        field = ((xx // period) + (yy // period)) % 2
    return GrayImage(np.where(field == 0, a, b).astype(np.uint8))


def _metallic(rng: np.random.Generator, size: int) -> GrayImage:
    lo = int(rng.integers(40, 110))
    hi = int(rng.integers(140, 210))
    horizontal = bool(rng.integers(0, 2))
    ramp = np.linspace(lo, hi, size)
    base = np.tile(ramp, (size, 1)) if horizontal else np.tile(ramp[:, None], (1, size))
    base = base.astype(np.float64)
    for _ in range(int(rng.integers(2, 5))):      # specular streaks
        center = rng.uniform(0, size)
        width = rng.uniform(3, 12)
        gain = rng.uniform(40, 90)
        axis = np.arange(size, dtype=np.float64)
        streak = gain * np.exp(-0.5 * ((axis - center) / width) ** 2)
        base += streak[None, :] if horizontal else streak[:, None]
    return GrayImage(np.clip(base, 0, 255).astype(np.uint8))


def _blobs(rng: np.random.Generator, size: int, n_lo: int, n_hi: int, gradient: bool) -> GrayImage:
    if gradient:
        ramp = np.linspace(rng.integers(120, 220), rng.integers(30, 110), size)
        base = np.tile(ramp[:, None], (1, size))
    else:
        base = np.full((size, size), float(rng.integers(60, 200)))
    yy, xx = np.mgrid[0:size, 0:size]
    for _ in range(int(rng.integers(n_lo, n_hi + 1))):
        cx, cy = rng.uniform(0, size, size=2)
        rx = rng.uniform(size * 0.05, size * 0.28)
        ry = rng.uniform(size * 0.05, size * 0.28)
        value = float(rng.integers(10, 246))
        blob = ((xx - cx) / rx) ** 2 + ((yy - cy) / ry) ** 2 <= 1.0
        base[blob] = value
    return GrayImage(np.clip(base, 0, 255).astype(np.uint8))


def make_background(category: str, index: int, count: int, seed: int, size: int = 160) -> GrayImage:
    """One deterministic source image for (category, index) under this seed."""
    if category not in CATEGORY_NAMES:
        raise BackgroundError(f"unknown background category {category!r}")
    rng = child_rng(seed, f"background:{category}", index)
    if category == "plain":
        return _plain(_even_intensities(count, 0, 255)[index], size)
    if category == "light_plain":
        return _plain(_even_intensities(count, *LIGHT_PLAIN_RANGE)[index], size)
    if category == "textures":
        return _textures(rng, size)
    if category == "metallic":
        return _metallic(rng, size)
    if category == "scenery":
        return _blobs(rng, size, 3, 8, gradient=True)
    if category == "food":
        return _blobs(rng, size, 5, 12, gradient=False)
    # "image": a mixed bag drawn from the other generators
    kind = int(rng.integers(0, 4))
    if kind == 0:
        return _plain(int(rng.integers(0, 256)), size)
    if kind == 1:
        return _textures(rng, size)
    if kind == 2:
        return _metallic(rng, size)
    return _blobs(rng, size, 3, 10, gradient=bool(rng.integers(0, 2)))


def make_category_sources(category: str, count: int, seed: int, size: int = 160) -> list[GrayImage]:
    if count < 1:
        raise BackgroundError("category needs at least one source image")
    return [make_background(category, i, count, seed, size) for i in range(count)]
