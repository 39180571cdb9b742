"""Quadrant visual servoing: a decaying step schedule drives the peg toward
the hole using only the per-axis signs of each prediction.

Update rule per iteration t (offsets in the hole frame, predictions in the
image frame): the peg offset moves by ``limit(t) * sign(prediction)`` on each
axis, where ``limit(t) = max_step * (horizon - t) / horizon``. A correct-sign
prediction therefore shrinks the error by limit(t), a wrong-sign one grows it
by the same amount, and a zero component holds its axis.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from .camera import CameraRig
from .predictors import Prediction
from .world import Quadrant, Vec2mm, Vec2px, WorldState, quadrant_of, sgn


class ServoError(ValueError):
    pass


@dataclass(frozen=True)
class ServoParams:
    max_step_mm: float = 10.0
    horizon: int = 10
    iterations: int = 5
    move_time_s: float = 2.0

    def __post_init__(self):
        if self.max_step_mm <= 0:
            raise ServoError("max step must be positive")
        if not 0 <= self.iterations < self.horizon:
            raise ServoError("iterations must satisfy 0 <= iterations < horizon")
        if self.move_time_s < 0:
            raise ServoError("move time cannot be negative")


def step_limit_at(t: int, params: ServoParams) -> float:
    """Allowed move distance at iteration t; decays linearly to 0 at the horizon."""
    if not 0 <= t <= params.horizon:
        raise ServoError(f"iteration {t} outside schedule [0, {params.horizon}]")
    return params.max_step_mm * (params.horizon - t) / params.horizon


def servo_step(offset: Vec2mm, prediction: Vec2px, t: int, params: ServoParams) -> Vec2mm:
    """One update of the peg offset from the signs of a prediction."""
    limit = step_limit_at(t, params)
    return Vec2mm(
        offset.x + limit * sgn(prediction.x),
        offset.y + limit * sgn(prediction.y),
    )


@dataclass(frozen=True)
class ServoStep:
    t: int
    prediction: Prediction
    quadrant: Quadrant | None
    step_limit_mm: float
    commanded_step: Vec2mm
    offset_after: Vec2mm

    def motion_fields(self) -> tuple:
        """Everything except the raw prediction values (sign-only contract)."""
        return (
            self.t,
            self.quadrant,
            self.step_limit_mm,
            (self.commanded_step.x, self.commanded_step.y),
            (self.offset_after.x, self.offset_after.y),
        )


@dataclass
class ServoTrace:
    steps: list[ServoStep]

    def motion_signature(self) -> tuple:
        return tuple(step.motion_fields() for step in self.steps)

    def write_jsonl(self, path: str | Path) -> None:
        with Path(path).open("w", encoding="utf-8") as fh:
            for step in self.steps:
                fh.write(json.dumps({
                    "t": step.t,
                    "prediction_x": step.prediction.xy.x,
                    "prediction_y": step.prediction.xy.y,
                    "quadrant": step.quadrant.value if step.quadrant else None,
                    "step_limit_mm": step.step_limit_mm,
                    "step_x_mm": step.commanded_step.x,
                    "step_y_mm": step.commanded_step.y,
                    "offset_x_mm": step.offset_after.x,
                    "offset_y_mm": step.offset_after.y,
                }) + "\n")


def run_servoing(
    world: WorldState,
    predictor,
    camera: CameraRig,
    params: ServoParams,
    deadline_s: float | None = None,
) -> ServoTrace:
    """Iterate observe -> predict -> step for the configured iteration count.

    Each iteration re-observes the moved scene, charges the predictor's
    latency plus the per-move time to the simulated clock, and records a
    trace row. The loop stops early when the simulated clock passes
    ``deadline_s``. Predictor failures and workspace exits propagate to the
    caller.
    """
    steps: list[ServoStep] = []
    for t in range(params.iterations):
        if deadline_s is not None and world.sim_time >= deadline_s:
            break
        obs = camera.observe(world, frame_index=t)
        prediction = predictor.predict(obs)
        limit = step_limit_at(t, params)
        before = world.peg_offset
        after = servo_step(before, prediction.xy, t, params)
        world.move_peg(after)
        world.advance(prediction.latency + params.move_time_s)
        steps.append(
            ServoStep(
                t=t,
                prediction=prediction,
                quadrant=quadrant_of(prediction.xy),
                step_limit_mm=limit,
                commanded_step=after - before,
                offset_after=after,
            )
        )
    return ServoTrace(steps)
