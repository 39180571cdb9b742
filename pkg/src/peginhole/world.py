"""Ground-truth geometry, frames, and quadrant semantics shared by all modules.

Conventions used throughout the package:

* ``Vec2mm`` lives in the hole-centered frame (same orientation as the
  end-effector frame): +x right, +y away from the operator ("up" in image
  space). ``WorldState.peg_offset`` is peg center minus hole center.
* ``Vec2px`` lives in the image frame of the concatenated camera view:
  the predicted/true hole position relative to the peg center, +x right,
  +y up. A peg sitting right of the hole therefore has a negative-x label.
* Pixel magnitudes round half away from zero (``round_px``), so the
  66 px <-> 40 mm correspondence stays symmetric under negation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum


WORKSPACE_HALF_WIDTH_MM = 100.0


class WorldError(ValueError):
    """Invalid geometry or an operation that violates a world invariant."""


@dataclass(frozen=True)
class Vec2mm:
    x: float
    y: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise WorldError(f"non-finite mm vector ({self.x}, {self.y})")

    def __add__(self, other: "Vec2mm") -> "Vec2mm":
        return Vec2mm(self.x + other.x, self.y + other.y)

    def __sub__(self, other: "Vec2mm") -> "Vec2mm":
        return Vec2mm(self.x - other.x, self.y - other.y)

    def __neg__(self) -> "Vec2mm":
        return Vec2mm(-self.x, -self.y)

    def norm(self) -> float:
        return math.hypot(self.x, self.y)


@dataclass(frozen=True)
class Vec2px:
    """Signed pixel offset; predictions may carry sub-pixel components."""

    x: float
    y: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise WorldError(f"non-finite px vector ({self.x}, {self.y})")

    def __neg__(self) -> "Vec2px":
        return Vec2px(-self.x, -self.y)


@dataclass(frozen=True)
class FrameScale:
    """Pixel-per-millimeter ratio between image frame and world frame.

    The default ties the 66 px half-range of the labeler to the 40 mm
    half-range of the position uncertainty: 66 / 40 = 1.65 px/mm.
    """

    px_per_mm: float = 1.65

    def __post_init__(self):
        if not (math.isfinite(self.px_per_mm) and self.px_per_mm > 0):
            raise WorldError(f"px_per_mm must be positive, got {self.px_per_mm}")


@dataclass(frozen=True)
class PegSpec:
    length_mm: float = 75.0
    diameter_mm: float = 10.0

    def __post_init__(self):
        if self.length_mm <= 0 or self.diameter_mm <= 0:
            raise WorldError("peg dimensions must be positive")


@dataclass(frozen=True)
class HoleSpec:
    diameter_mm: float = 10.4
    radial_clearance_mm: float = 0.2  # half of the 0.4 mm diametral lenience
    center: Vec2mm = field(default_factory=lambda: Vec2mm(0.0, 0.0))

    def __post_init__(self):
        if self.radial_clearance_mm <= 0:
            raise WorldError("radial clearance must be positive")

    def validate_against(self, peg: PegSpec) -> None:
        if self.diameter_mm <= peg.diameter_mm:
            raise WorldError(
                f"hole diameter {self.diameter_mm} must exceed peg diameter {peg.diameter_mm}"
            )


class Quadrant(Enum):
    TOPLEFT = "topleft"
    BOTTOMLEFT = "bottomleft"
    BOTTOMRIGHT = "bottomright"
    TOPRIGHT = "topright"

    def opposite(self) -> "Quadrant":
        return _OPPOSITE[self]


_OPPOSITE = {
    Quadrant.TOPRIGHT: Quadrant.BOTTOMLEFT,
    Quadrant.BOTTOMLEFT: Quadrant.TOPRIGHT,
    Quadrant.TOPLEFT: Quadrant.BOTTOMRIGHT,
    Quadrant.BOTTOMRIGHT: Quadrant.TOPLEFT,
}


def quadrant_of(offset: Vec2px) -> Quadrant | None:
    """Map the sign pair of a pixel offset to its quadrant.

    Convention: (+,+) topright, (-,+) topleft, (-,-) bottomleft,
    (+,-) bottomright. Returns None when either component is exactly
    zero (an on-axis offset has no quadrant; metric code counts it as
    a mismatch).
    """
    if offset.x == 0 or offset.y == 0:
        return None
    if offset.x > 0:
        return Quadrant.TOPRIGHT if offset.y > 0 else Quadrant.BOTTOMRIGHT
    return Quadrant.TOPLEFT if offset.y > 0 else Quadrant.BOTTOMLEFT


def px_to_mm(offset: Vec2px, scale: FrameScale) -> Vec2mm:
    return Vec2mm(offset.x / scale.px_per_mm, offset.y / scale.px_per_mm)


def mm_to_px(offset: Vec2mm, scale: FrameScale) -> Vec2px:
    return Vec2px(offset.x * scale.px_per_mm, offset.y * scale.px_per_mm)


def round_px(value: float) -> int:
    """Round to the nearest integer pixel, ties away from zero."""
    return int(math.copysign(math.floor(abs(value) + 0.5), value))


def sgn(value: float) -> int:
    if value > 0:
        return 1
    if value < 0:
        return -1
    return 0


@dataclass
class WorldState:
    """Mutable ground truth for one episode; confined to its executor.

    peg_offset is peg center minus hole center in the hole frame; peg_z is
    the tip height above the surface (negative while inserted); sim_time
    only ever advances.
    """

    peg_offset: Vec2mm
    peg_z_mm: float = 5.0
    contact_force_z: float = 0.0
    sim_time: float = 0.0
    rng_seed: int = 0
    workspace_half_width_mm: float = WORKSPACE_HALF_WIDTH_MM
    peg: PegSpec = field(default_factory=PegSpec)
    hole: HoleSpec = field(default_factory=HoleSpec)

    def __post_init__(self):
        self.hole.validate_against(self.peg)
        self._check_bounds(self.peg_offset)
        if self.contact_force_z < 0:
            raise WorldError("contact force cannot be negative")

    def _check_bounds(self, offset: Vec2mm) -> None:
        limit = self.workspace_half_width_mm
        if abs(offset.x) > limit or abs(offset.y) > limit:
            raise WorldError(
                f"peg offset ({offset.x:.2f}, {offset.y:.2f}) outside +/-{limit} mm workspace"
            )

    def move_peg(self, offset: Vec2mm) -> None:
        self._check_bounds(offset)
        self.peg_offset = offset

    def set_peg_z(self, z_mm: float) -> None:
        if z_mm < -self.peg.length_mm:
            raise WorldError(f"peg z {z_mm} below full insertion depth")
        self.peg_z_mm = z_mm

    def advance(self, dt: float) -> None:
        if dt < 0:
            raise WorldError(f"time cannot run backwards (dt={dt})")
        self.sim_time += dt
