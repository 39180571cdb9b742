"""Procedural two-view camera: gripper mask, concatenated render, labeling.

The concatenated view is a square canvas (default 160x160) made of two
half-views, each ``size x size/2``, placed left/right. Each half-view is the
crop one camera would produce around the peg center, so its reference column
sits at the half's center (columns size/4 and 3*size/4). The hole disc for a
label (x, y) is drawn at column ``size/4 + x`` in the first half and at the
horizontally reversed column ``3*size/4 - x`` in the second; rows grow
downward, so the disc row is ``size/2 - y`` in both halves.

Discs are clipped only at the canvas edge, not at the seam between halves:
the full labeled range (+/-66 px at default scale) stays visible, matching
the redundancy of the two physical viewpoints.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from .compose import compose_scene
from .image import GrayImage, read_pgm, write_pgm
from .world import (
    FrameScale,
    PegSpec,
    Vec2px,
    WorldState,
    mm_to_px,
    round_px,
)

DEFAULT_VIEW_SIZE = 160
DEFAULT_GRIPPER_INTENSITY = 40
DEFAULT_NOISE_SIGMA = 8.0


class RenderError(ValueError):
    pass


class LabelRangeError(ValueError):
    """The peg offset maps to a label outside the concatenated crop."""


@dataclass
class GripperMask:
    """Binary occluder template: 0 = gripper/peg pixel, 255 = transparent."""

    image: GrayImage
    peg_center: Vec2px

    def __post_init__(self):
        values = np.unique(self.image.pixels)
        if not np.isin(values, (0, 255)).all():
            raise RenderError("gripper mask must be strictly binary (0/255)")
        if not (0 <= self.peg_center.x < self.image.width and 0 <= self.peg_center.y < self.image.height):
            raise RenderError("peg_center outside mask bounds")


@dataclass
class RenderParams:
    background: GrayImage
    hole_center: Vec2px
    hole_diameter_px: float
    hole_darkness: int
    noise_sigma: float = DEFAULT_NOISE_SIGMA
    seed: int = 0
    gripper_intensity: int = DEFAULT_GRIPPER_INTENSITY

    def __post_init__(self):
        if self.hole_diameter_px <= 0:
            raise RenderError("hole diameter must be positive")
        if not 0 <= self.hole_darkness <= 255:
            raise RenderError("hole darkness must be an 8-bit intensity")
        if self.noise_sigma < 0:
            raise RenderError("noise sigma cannot be negative")
        if not 0 <= self.gripper_intensity <= 255:
            raise RenderError("gripper intensity must be an 8-bit intensity")


def _lerp(a: float, b: float, f: float) -> float:
    return a + (b - a) * f


def make_procedural_mask(spec: PegSpec, scale: FrameScale, size: int = DEFAULT_VIEW_SIZE) -> GripperMask:
    """Deterministic stand-in for a hand-marked gripper template.

    Draws a front-view silhouette: a vertical peg of width
    round(diameter * px_per_mm) centered on the image center column, plus two
    mirrored finger bars slanting in from the top corners. At reduced canvas
    sizes all features scale with size/160.
    """
    if size < 8 or size % 2:
        raise RenderError("mask size must be even and at least 8")
    f = size / DEFAULT_VIEW_SIZE
    canvas = np.full((size, size), 255, dtype=np.uint8)

    peg_w = max(1, round_px(spec.diameter_mm * scale.px_per_mm * f))
    center = size // 2
    c0 = center - peg_w // 2
    tip_row = center + max(1, round_px(8 * f))
    canvas[0:tip_row, c0:c0 + peg_w] = 0

    finger_len = max(2, round_px(40 * f))
    finger_w = max(1, round_px(12 * f))
    col_start, col_end = 14 * f, 30 * f
    for r in range(finger_len):
        t = r / (finger_len - 1)
        mid = _lerp(col_start, col_end, t)
        lo = max(0, round_px(mid - finger_w / 2))
        hi = min(size, round_px(mid + finger_w / 2) + 1)
        canvas[r, lo:hi] = 0                       # left finger
        canvas[r, size - hi:size - lo] = 0         # mirrored right finger

    return GripperMask(GrayImage(canvas), Vec2px(center, center))


def save_mask(mask: GripperMask, path: str | Path) -> None:
    """Write the mask as PGM plus a JSON sidecar holding peg_center."""
    path = Path(path)
    write_pgm(mask.image, path)
    sidecar = {"peg_center": {"x": mask.peg_center.x, "y": mask.peg_center.y}}
    path.with_suffix(".json").write_text(json.dumps(sidecar, indent=2) + "\n")


def load_mask(path: str | Path) -> GripperMask:
    path = Path(path)
    meta = json.loads(path.with_suffix(".json").read_text())
    center = meta["peg_center"]
    return GripperMask(read_pgm(path), Vec2px(float(center["x"]), float(center["y"])))


def _background_halves(background: GrayImage, size: int) -> tuple[np.ndarray, np.ndarray]:
    half = size // 2
    if background.height < size or background.width < half:
        raise RenderError(
            f"background region {background.width}x{background.height} smaller than {half}x{size}"
        )
    left = background.pixels[:size, :half]
    if background.width >= size:
        right = background.pixels[:size, half:size]
    else:
        right = left
    return left, right


def render_concat_view(world: WorldState, mask: GripperMask, params: RenderParams) -> GrayImage:
    """Render the concatenated two-view image for the current scene.

    ``params.hole_center`` must encode the same geometry as
    ``world.peg_offset`` (label = scaled, negated offset); the caller builds
    params via ``ground_truth_label`` so the two cannot drift apart.
    """
    size = mask.image.height
    if mask.image.width != size:
        raise RenderError("mask must be square")
    left, right = _background_halves(params.background, size)

    quarter = size // 4
    x, y = params.hole_center.x, params.hole_center.y
    cy = size / 2 - y
    cx1 = quarter + x
    cx2 = (size - quarter) - x

    out = np.empty((size, size), dtype=np.uint8)
    compose_scene(
        out,
        np.ascontiguousarray(left),
        np.ascontiguousarray(right),
        mask.image.pixels,
        float(cx1),
        float(cy),
        float(cx2),
        float(cy),
        params.hole_diameter_px / 2.0,
        params.hole_darkness,
        params.gripper_intensity,
    )

    if params.noise_sigma > 0:
        rng = np.random.default_rng(params.seed)
        noisy = out.astype(np.float64) + rng.normal(0.0, params.noise_sigma, out.shape)
        out = np.clip(np.rint(noisy), 0, 255).astype(np.uint8)
    return GrayImage(out)


def ground_truth_label(
    world: WorldState, scale: FrameScale, size: int = DEFAULT_VIEW_SIZE
) -> Vec2px:
    """Hole position relative to the peg center, in integer image pixels.

    This is the negated, scaled peg offset, rounded half away from zero.
    Offsets whose label would leave the concatenated crop are rejected.
    """
    raw = mm_to_px(-world.peg_offset, scale)
    label = Vec2px(round_px(raw.x), round_px(raw.y))
    bound = size // 2
    if abs(label.x) > bound or abs(label.y) > bound:
        raise LabelRangeError(
            f"offset {world.peg_offset} labels to ({label.x}, {label.y}), outside +/-{bound} px"
        )
    return label


@dataclass
class Observation:
    """One servo-loop sensing step: the true label plus a lazy render.

    The render only runs if a predictor actually consumes pixels, so
    oracle- and statistics-driven runs skip image synthesis entirely.
    """

    true_label: Vec2px
    _render: Callable[[], GrayImage]
    _image: GrayImage | None = None

    def image(self) -> GrayImage:
        if self._image is None:
            self._image = self._render()
        return self._image


@dataclass
class CameraRig:
    """Bundles the scene assets and per-frame randomization for one episode."""

    mask: GripperMask
    background: GrayImage
    scale: FrameScale = field(default_factory=FrameScale)
    hole_diameter_px: float = 22.0
    hole_darkness: int = 30
    noise_sigma: float = DEFAULT_NOISE_SIGMA
    gripper_intensity: int = DEFAULT_GRIPPER_INTENSITY
    seed: int = 0

    @classmethod
    def default(cls, seed: int = 0, background_value: int = 200) -> "CameraRig":
        mask = make_procedural_mask(PegSpec(), FrameScale())
        size = mask.image.height
        return cls(mask=mask, background=GrayImage.filled(size, size, background_value), seed=seed)

    def observe(self, world: WorldState, frame_index: int) -> Observation:
        label = ground_truth_label(world, self.scale, self.mask.image.height)
        params = RenderParams(
            background=self.background,
            hole_center=label,
            hole_diameter_px=self.hole_diameter_px,
            hole_darkness=self.hole_darkness,
            noise_sigma=self.noise_sigma,
            seed=(self.seed * 1_000_003 + frame_index) & 0xFFFFFFFF,
            gripper_intensity=self.gripper_intensity,
        )
        return Observation(label, lambda: render_concat_view(world, self.mask, params))
