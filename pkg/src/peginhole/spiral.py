"""Outward spiral sweep that finds the hole by a drop in downward force.

The path is an Archimedean spiral around the peg position at sweep start:
theta advances by a fixed angle per step and the radius grows by one pitch
per full rotation, starting from the initial radius. The peg slides from
waypoint to waypoint while the vertical force is monitored; the sweep stops
when the force falls below the threshold (tip over the hole) or the radius
passes its maximum.

Capture is detected along the whole swept segment, not just at waypoints: a
robot drags the peg continuously, and at the default 12.5 degrees per step
the gap between consecutive waypoints is many times the capture radius. The
segment test is the exact minimum distance from the moved line segment to
the hole center.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

from .contact import ContactParams, contact_force, segment_capture_point
from .world import Vec2mm, WorldState, WorldError


class SpiralError(ValueError):
    pass


@dataclass(frozen=True)
class SpiralParams:
    start_radius_mm: float = 0.3
    max_radius_mm: float = 7.0
    step_deg: float = 12.5
    pitch_mm: float = 0.3           # radial growth per full rotation
    force_threshold_n: float = 20.0
    step_time_s: float = 0.04

    def __post_init__(self):
        if not 0 < self.start_radius_mm <= self.max_radius_mm:
            raise SpiralError("need 0 < start radius <= max radius")
        if self.step_deg <= 0 or self.pitch_mm <= 0:
            raise SpiralError("step angle and pitch must be positive")
        if self.force_threshold_n <= 0:
            raise SpiralError("force threshold must be positive")
        if self.step_time_s < 0:
            raise SpiralError("step time cannot be negative")


def spiral_point(k: int, params: SpiralParams) -> Vec2mm:
    """Waypoint k of the spiral, in the sweep-start frame."""
    if k < 0:
        raise SpiralError("step index cannot be negative")
    theta_deg = k * params.step_deg
    radius = params.start_radius_mm + params.pitch_mm * theta_deg / 360.0
    theta = math.radians(theta_deg)
    return Vec2mm(radius * math.cos(theta), radius * math.sin(theta))


def max_steps(params: SpiralParams) -> int:
    """Upper bound on waypoints before the radius passes its maximum."""
    span = params.max_radius_mm - params.start_radius_mm
    return math.ceil(360.0 * span / (params.pitch_mm * params.step_deg)) + 1


@dataclass(frozen=True)
class SpiralOutcome:
    found: bool
    steps: int
    final_offset: Vec2mm
    termination: str  # force_drop | r_exceeded | workspace_abort | budget_exhausted

    def __post_init__(self):
        if self.found != (self.termination == "force_drop"):
            raise SpiralError("found flag must match force_drop termination")


@dataclass(frozen=True)
class SpiralTraceRow:
    k: int
    theta_deg: float
    r_mm: float
    x_mm: float
    y_mm: float
    force_n: float


def write_spiral_trace(rows: list[SpiralTraceRow], path: str | Path) -> None:
    with Path(path).open("w", encoding="utf-8") as fh:
        for row in rows:
            fh.write(json.dumps({
                "k": row.k,
                "theta_deg": row.theta_deg,
                "r_mm": row.r_mm,
                "x_mm": row.x_mm,
                "y_mm": row.y_mm,
                "force_n": row.force_n,
            }) + "\n")


def run_spiral(
    world: WorldState,
    contact: ContactParams,
    params: SpiralParams,
    deadline_s: float | None = None,
    trace: list[SpiralTraceRow] | None = None,
) -> SpiralOutcome:
    """Sweep the spiral from the current peg position until the force drops.

    The peg is assumed pressed toward the surface. Charges one step time per
    waypoint; stops early when the simulated clock passes ``deadline_s``.
    """
    center = world.peg_offset

    if contact_force(world, contact) < params.force_threshold_n:
        return SpiralOutcome(True, 0, world.peg_offset, "force_drop")

    previous = center
    k = 0
    while True:
        theta_deg = k * params.step_deg
        radius = params.start_radius_mm + params.pitch_mm * theta_deg / 360.0
        if radius > params.max_radius_mm:
            return SpiralOutcome(False, k, world.peg_offset, "r_exceeded")
        if deadline_s is not None and world.sim_time >= deadline_s:
            return SpiralOutcome(False, k, world.peg_offset, "budget_exhausted")

        target = center + spiral_point(k, params)
        captured = segment_capture_point(previous, target, contact)
        endpoint = captured if captured is not None else target
        try:
            world.move_peg(endpoint)
        except WorldError:
            world.advance(params.step_time_s)
            return SpiralOutcome(False, k, world.peg_offset, "workspace_abort")
        world.advance(params.step_time_s)
        force = contact_force(world, contact)
        if trace is not None:
            trace.append(SpiralTraceRow(
                k=k,
                theta_deg=theta_deg,
                r_mm=radius,
                x_mm=endpoint.x - center.x,
                y_mm=endpoint.y - center.y,
                force_n=force,
            ))
        if force < params.force_threshold_n:
            return SpiralOutcome(True, k + 1, world.peg_offset, "force_drop")
        previous = target
        k += 1
