"""Vertical contact model and the admittance-controlled insertion phase.

Contact is deliberately minimal: while searching, the peg is pressed a fixed
depth into a linearly stiff surface, so the downward force reads
stiffness * press_depth everywhere except over the hole, where the tip clears
in and the force vanishes. The defaults (10 N/mm * 2.5 mm = 25 N) bracket the
20 N search threshold from above.

Insertion integrates a per-axis spring-damper admittance (no inertia term):
velocity = (external force + spring pull toward the command) / damper. The
vertical axis is commanded to the target depth with a constant downward
force; the lateral axes are commanded to the hole center, with the wall
modeled as a hard clamp at the radial clearance. Damper/spring vectors carry
six entries (three translations, three rotations); the rotational entries are
stored but inert in this planar model.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .world import Vec2mm, WorldState


class ContactError(ValueError):
    pass


class CaptureError(RuntimeError):
    """Insertion was requested while the peg is not over the hole."""


@dataclass(frozen=True)
class ContactParams:
    surface_stiffness_n_per_mm: float = 10.0
    press_depth_mm: float = 2.5
    capture_radius_mm: float = 0.2

    def __post_init__(self):
        if min(self.surface_stiffness_n_per_mm, self.press_depth_mm, self.capture_radius_mm) <= 0:
            raise ContactError("contact parameters must be positive")


def contact_force(world: WorldState, params: ContactParams) -> float:
    """Downward reaction force with the peg pressed against the surface.

    Exactly at the capture radius counts as captured (closed boundary), so
    the search threshold comparison has no knife-edge ambiguity.
    """
    if world.peg_offset.norm() > params.capture_radius_mm:
        force = params.surface_stiffness_n_per_mm * params.press_depth_mm
    else:
        force = 0.0
    world.contact_force_z = force
    return force


def segment_capture_point(start: Vec2mm, end: Vec2mm, params: ContactParams) -> Vec2mm | None:
    """Point of the swept segment where the pressed peg drops into the hole.

    Offsets are peg-minus-hole, so capture means the segment comes within the
    capture radius of the origin. Returns the segment's closest point to the
    hole center when that point is captured, None otherwise. Using the
    minimum-distance point (exact, closed form) guarantees the returned
    position also satisfies the closed capture test in ``contact_force``
    whenever any swept point does.
    """
    ax, ay = start.x, start.y
    dx, dy = end.x - start.x, end.y - start.y
    seg_sq = dx * dx + dy * dy
    t = 0.0 if seg_sq == 0 else min(1.0, max(0.0, -(ax * dx + ay * dy) / seg_sq))
    px, py = ax + t * dx, ay + t * dy
    if math.hypot(px, py) > params.capture_radius_mm:
        return None
    return Vec2mm(px, py)


@dataclass(frozen=True)
class ImpedanceParams:
    damper: tuple[float, ...] = (50.0, 50.0, 50.0, 1.0, 1.0, 1.0)
    spring: tuple[float, ...] = (100.0,) * 6
    dt_s: float = 0.01
    target_depth_mm: float = 10.0
    timeout_s: float = 30.0
    down_force_n: float = 20.0

    def __post_init__(self):
        if len(self.damper) != 6 or len(self.spring) != 6:
            raise ContactError("damper and spring must have six entries")
        if min(self.damper) <= 0:
            raise ContactError("damper entries must be positive")
        # spring entries may be zero (pure damper), never negative
        if min(self.spring) < 0:
            raise ContactError("spring entries cannot be negative")
        if self.dt_s <= 0 or self.target_depth_mm <= 0 or self.timeout_s <= 0:
            raise ContactError("dt, target depth and timeout must be positive")


@dataclass(frozen=True)
class InsertionOutcome:
    success: bool
    depth_mm: float
    elapsed_s: float
    termination: str  # inserted | jammed_timeout

    def __post_init__(self):
        if self.success != (self.termination == "inserted"):
            raise ContactError("success flag must match inserted termination")


@dataclass(frozen=True)
class InsertionTraceRow:
    t_s: float
    depth_mm: float
    force_z_n: float
    offset_x_mm: float
    offset_y_mm: float


def impedance_insert(
    world: WorldState,
    params: ImpedanceParams,
    capture_radius_mm: float,
    deadline_s: float | None = None,
    trace: list[InsertionTraceRow] | None = None,
) -> InsertionOutcome:
    """Drive the captured peg down to the target depth.

    First-order explicit integration at ``dt_s``. Succeeds when depth reaches
    the target; gives up as jammed when the insertion timeout or the episode
    deadline passes first.
    """
    if world.peg_offset.norm() > capture_radius_mm:
        raise CaptureError(
            f"peg offset {world.peg_offset.norm():.3f} mm exceeds capture radius {capture_radius_mm} mm"
        )

    c_x, c_y, c_z = params.damper[:3]
    k_x, k_y, k_z = params.spring[:3]
    target = params.target_depth_mm
    depth = max(0.0, -world.peg_z_mm)
    x, y = world.peg_offset.x, world.peg_offset.y
    elapsed = 0.0

    while depth < target:
        if elapsed >= params.timeout_s or (deadline_s is not None and world.sim_time >= deadline_s):
            world.move_peg(Vec2mm(x, y))
            return InsertionOutcome(False, depth, elapsed, "jammed_timeout")

        force_z = params.down_force_n + k_z * (target - depth)
        depth += (force_z / c_z) * params.dt_s
        x += (-k_x * x / c_x) * params.dt_s
        y += (-k_y * y / c_y) * params.dt_s
        # hard wall at the clearance radius
        norm = math.hypot(x, y)
        if norm > capture_radius_mm:
            scale = capture_radius_mm / norm
            x *= scale
            y *= scale

        elapsed += params.dt_s
        world.advance(params.dt_s)
        world.set_peg_z(-min(depth, target, world.peg.length_mm))
        if trace is not None:
            trace.append(InsertionTraceRow(elapsed, depth, force_z, x, y))

    world.move_peg(Vec2mm(x, y))
    return InsertionOutcome(True, depth, elapsed, "inserted")
