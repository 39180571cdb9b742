"""Episode orchestration, predictor evaluation metrics, and experiment suites.

An episode runs the fixed sequence: (optional) visual servoing, press-down,
spiral search, and insertion, all on one seeded world with one simulated
clock. The episode never exceeds its time budget; phases abort mid-run when
the clock hits it. Suites run seeded grids of episodes over offsets,
predictors, and servo on/off, and persist per-episode CSV plus aggregate
JSON, byte-identical under a fixed seed.
"""

from __future__ import annotations

import csv
import io
import json
import statistics
from dataclasses import dataclass, field
from pathlib import Path

from .camera import CameraRig, GrayImage, LabelRangeError, Observation
from .contact import (
    ContactParams,
    ImpedanceParams,
    InsertionOutcome,
    InsertionTraceRow,
    impedance_insert,
)
from .dataset import load_sample_image, read_labels
from .predictors import (
    OUTLIER_MSE_THRESHOLD,
    PredictorFailure,
    per_sample_mse,
)
from .seeding import child_seed
from .servo import ServoParams, ServoTrace, run_servoing
from .spiral import SpiralOutcome, SpiralParams, SpiralTraceRow, run_spiral
from .world import (
    FrameScale,
    HoleSpec,
    PegSpec,
    Vec2mm,
    Vec2px,
    WorldError,
    WorldState,
    quadrant_of,
)


class HarnessError(ValueError):
    pass


# ---------------------------------------------------------------- metrics


@dataclass(frozen=True)
class MetricsReport:
    mse_all: float
    mse_no_outlier: float
    r_outlier: float
    r_quadrant: float
    n: int
    mse_outlier_mean: float = 0.0

    def __post_init__(self):
        if self.n < 1:
            raise HarnessError("metrics need at least one sample")
        if not (0 <= self.r_outlier <= 1 and 0 <= self.r_quadrant <= 1):
            raise HarnessError("rates must be fractions")

    def to_json_dict(self) -> dict:
        return {
            "mse_all": self.mse_all,
            "mse_no_outlier": self.mse_no_outlier,
            "mse_outlier_mean": self.mse_outlier_mean,
            "r_outlier": self.r_outlier,
            "r_quadrant": self.r_quadrant,
            "n": self.n,
        }


def summarize_predictions(pairs) -> MetricsReport:
    """Metrics over (predicted, truth) pixel pairs.

    Per-image MSE averages the squared error of the two components; a sample
    is an outlier when that exceeds the fixed threshold. Quadrant accuracy
    counts exact sign-pair matches; a prediction with a zero component has no
    quadrant and counts as a mismatch.
    """
    n = 0
    sum_all = 0.0
    sum_good = 0.0
    sum_out = 0.0
    n_out = 0
    n_quadrant = 0
    for predicted, truth in pairs:
        m = per_sample_mse(predicted, truth)
        n += 1
        sum_all += m
        if m > OUTLIER_MSE_THRESHOLD:
            n_out += 1
            sum_out += m
        else:
            sum_good += m
        truth_q = quadrant_of(truth)
        if truth_q is not None and quadrant_of(predicted) is truth_q:
            n_quadrant += 1
    if n == 0:
        raise HarnessError("empty prediction set")

    n_good = n - n_out
    report = MetricsReport(
        mse_all=sum_all / n,
        mse_no_outlier=sum_good / n_good if n_good else 0.0,
        mse_outlier_mean=sum_out / n_out if n_out else 0.0,
        r_outlier=n_out / n,
        r_quadrant=n_quadrant / n,
        n=n,
    )
    # decomposition identity: mse_all = (1-r)*mse_good + r*mse_outlier
    recomposed = (1 - report.r_outlier) * report.mse_no_outlier + report.r_outlier * report.mse_outlier_mean
    if abs(recomposed - report.mse_all) > 1e-9 * max(1.0, report.mse_all):
        raise HarnessError("metric decomposition identity violated")
    return report


def eval_predictor(dataset_dir: str | Path, predictor) -> MetricsReport:
    """Evaluate a predictor over a generated dataset directory."""
    records = read_labels(dataset_dir)

    def pairs():
        for rec in records:
            truth = Vec2px(float(rec["x"]), float(rec["y"]))
            if predictor.needs_image:
                image = load_sample_image(dataset_dir, rec)
                obs = Observation(truth, lambda img=image: img)
            else:
                obs = Observation(truth, _no_image)
            yield predictor.predict(obs).xy, truth

    return summarize_predictions(pairs())


def _no_image() -> GrayImage:
    raise HarnessError("this predictor should not consume images")


# ---------------------------------------------------------------- episodes


@dataclass
class EpisodeConfig:
    initial_offset: Vec2mm
    predictor_spec: dict = field(default_factory=lambda: {"kind": "oracle"})
    servo_enabled: bool = True
    time_budget_s: float = 90.0
    seed: int = 0
    scale: FrameScale = field(default_factory=FrameScale)
    servo: ServoParams = field(default_factory=ServoParams)
    spiral: SpiralParams = field(default_factory=SpiralParams)
    contact: ContactParams = field(default_factory=ContactParams)
    impedance: ImpedanceParams = field(default_factory=ImpedanceParams)
    approach_time_s: float = 1.0
    background_value: int = 200
    workspace_half_width_mm: float = 100.0

    def __post_init__(self):
        if self.time_budget_s <= 0:
            raise HarnessError("time budget must be positive")
        if self.servo_enabled:
            # servoing only works while the hole stays inside the labeled crop
            limit = 40.0 * 1.65 / self.scale.px_per_mm
            if max(abs(self.initial_offset.x), abs(self.initial_offset.y)) > limit:
                raise HarnessError(
                    f"initial offset {self.initial_offset} outside the {limit:.0f} mm labeled range"
                )


@dataclass
class EpisodeResult:
    success: bool
    reason: str | None
    servo_time_s: float
    spiral_time_s: float
    insertion_time_s: float
    total_s: float
    seed: int
    initial_offset: Vec2mm
    final_offset: Vec2mm
    servo_trace: ServoTrace | None
    spiral_outcome: SpiralOutcome | None
    spiral_trace: list[SpiralTraceRow]
    insertion_outcome: InsertionOutcome | None
    insertion_trace: list[InsertionTraceRow]

    def to_row(self) -> dict:
        return {
            "seed": self.seed,
            "offset_x_mm": self.initial_offset.x,
            "offset_y_mm": self.initial_offset.y,
            "offset_mm": self.initial_offset.norm(),
            "success": int(self.success),
            "reason": self.reason or "",
            "servo_time_s": round(self.servo_time_s, 6),
            "spiral_time_s": round(self.spiral_time_s, 6),
            "insertion_time_s": round(self.insertion_time_s, 6),
            "total_s": round(self.total_s, 6),
            "spiral_steps": self.spiral_outcome.steps if self.spiral_outcome else "",
            "spiral_termination": self.spiral_outcome.termination if self.spiral_outcome else "",
            "final_error_mm": round(self.final_offset.norm(), 6),
        }


def _build_episode_predictor(config: EpisodeConfig, endpoint=None):
    from .config import build_predictor

    return build_predictor(
        config.predictor_spec, child_seed(config.seed, "predictor"), endpoint=endpoint
    )


def run_episode(config: EpisodeConfig, endpoint=None) -> EpisodeResult:
    """Execute the search-and-insert sequence on one seeded world.

    Servo-enabled episodes loop servo -> press -> spiral from the current
    position until the spiral captures the hole or the budget runs out: the
    cameras still see the hole after a failed sweep, so re-servoing from
    wherever the peg ended is the natural vision-guided recovery. Blind
    (servo-disabled) episodes run one sweep and stop, recording the
    geometric termination reason.
    """
    world = WorldState(
        peg_offset=config.initial_offset,
        rng_seed=config.seed,
        workspace_half_width_mm=config.workspace_half_width_mm,
        peg=PegSpec(),
        hole=HoleSpec(radial_clearance_mm=config.contact.capture_radius_mm),
    )
    predictor = _build_episode_predictor(config, endpoint)
    budget = config.time_budget_s
    servo_active = config.servo_enabled and config.servo.iterations > 0
    rig: CameraRig | None = None
    if servo_active:
        rig = CameraRig.default(
            seed=child_seed(config.seed, "camera"),
            background_value=config.background_value,
        )
        rig.scale = config.scale

    servo_trace: ServoTrace | None = None
    spiral_outcome: SpiralOutcome | None = None
    insertion_outcome: InsertionOutcome | None = None
    spiral_rows: list[SpiralTraceRow] = []
    insertion_rows: list[InsertionTraceRow] = []
    reason: str | None = None
    success = False
    t_servo = t_spiral = t_insert = 0.0

    def finish() -> EpisodeResult:
        return EpisodeResult(
            success=success,
            reason=reason,
            servo_time_s=t_servo,
            spiral_time_s=t_spiral,
            insertion_time_s=t_insert,
            total_s=world.sim_time,
            seed=config.seed,
            initial_offset=config.initial_offset,
            final_offset=world.peg_offset,
            servo_trace=servo_trace,
            spiral_outcome=spiral_outcome,
            spiral_trace=spiral_rows,
            insertion_outcome=insertion_outcome,
            insertion_trace=insertion_rows,
        )

    while True:
        if servo_active:
            mark = world.sim_time
            try:
                trace = run_servoing(world, predictor, rig, config.servo, deadline_s=budget)
            except PredictorFailure as exc:
                reason = f"predictor_failure: {exc}"
                return finish()
            except LabelRangeError as exc:
                reason = f"label_out_of_range: {exc}"
                return finish()
            except WorldError as exc:
                reason = f"workspace_abort: {exc}"
                return finish()
            servo_trace = trace if servo_trace is None else servo_trace
            t_servo += world.sim_time - mark
            if world.sim_time >= budget:
                reason = "budget_exhausted"
                return finish()

        # press toward the surface and sweep
        mark = world.sim_time
        world.advance(config.approach_time_s)
        world.set_peg_z(0.0)
        spiral_outcome = run_spiral(
            world, config.contact, config.spiral, deadline_s=budget, trace=spiral_rows
        )
        t_spiral += world.sim_time - mark
        if spiral_outcome.found:
            break
        retryable = (
            servo_active
            and spiral_outcome.termination == "r_exceeded"
            and world.sim_time < budget
        )
        if not retryable:
            reason = f"spiral_{spiral_outcome.termination}"
            return finish()
        spiral_rows = []  # keep only the final sweep's trace

    insertion_outcome = impedance_insert(
        world,
        config.impedance,
        config.contact.capture_radius_mm,
        deadline_s=budget,
        trace=insertion_rows,
    )
    t_insert = world.sim_time - t_servo - t_spiral
    if insertion_outcome.success and world.sim_time <= budget:
        success = True
    else:
        reason = f"insertion_{insertion_outcome.termination}"
    return finish()


# ---------------------------------------------------------------- suites


@dataclass
class SuiteCell:
    offset: Vec2mm
    predictor_spec: dict
    predictor_label: str
    servo_enabled: bool


@dataclass
class SuiteReport:
    out_dir: Path
    rows: list[dict]
    aggregates: dict
    error_count: int


CSV_FIELDS = [
    "cell",
    "predictor",
    "servo",
    "episode",
    "seed",
    "offset_x_mm",
    "offset_y_mm",
    "offset_mm",
    "success",
    "reason",
    "servo_time_s",
    "spiral_time_s",
    "insertion_time_s",
    "total_s",
    "spiral_steps",
    "spiral_termination",
    "final_error_mm",
]


def run_experiment(suite, out_dir: str | Path) -> SuiteReport:
    """Run every (offset x predictor x servo) cell of a suite.

    Writes ``suite.csv`` (one row per episode), ``aggregates.json`` (per-cell
    success rate and time statistics), and first-episode servo/spiral traces
    per cell under ``traces/``. Episodes that raise are recorded as errors
    and never abort the suite.
    """
    from .config import SuiteConfig, make_episode_config, open_shared_endpoints

    assert isinstance(suite, SuiteConfig)
    out_dir = Path(out_dir)
    (out_dir / "traces").mkdir(parents=True, exist_ok=True)

    rows: list[dict] = []
    cells_aggregate: list[dict] = []
    error_count = 0

    with open_shared_endpoints(suite) as endpoints:
        for cell_idx, cell in enumerate(suite.cells()):
            cell_id = f"{cell_idx:03d}"
            successes = 0
            times: list[float] = []
            success_times: list[float] = []
            terminations: dict[str, int] = {}
            for episode_idx in range(suite.episodes_per_cell):
                seed = child_seed(suite.seed, "episode", cell_idx, episode_idx)
                try:
                    config = make_episode_config(suite, cell, seed)
                    result = run_episode(
                        config, endpoint=endpoints.get(cell.predictor_label)
                    )
                except (PredictorFailure, WorldError, HarnessError, ValueError) as exc:
                    error_count += 1
                    rows.append({
                        "cell": cell_id,
                        "predictor": cell.predictor_label,
                        "servo": int(cell.servo_enabled),
                        "episode": episode_idx,
                        "seed": seed,
                        "offset_x_mm": cell.offset.x,
                        "offset_y_mm": cell.offset.y,
                        "offset_mm": cell.offset.norm(),
                        "success": 0,
                        "reason": f"error: {exc}",
                        "servo_time_s": "",
                        "spiral_time_s": "",
                        "insertion_time_s": "",
                        "total_s": "",
                        "spiral_steps": "",
                        "spiral_termination": "",
                        "final_error_mm": "",
                    })
                    continue
                row = {"cell": cell_id,
                       "predictor": cell.predictor_label,
                       "servo": int(cell.servo_enabled),
                       "episode": episode_idx}
                row.update(result.to_row())
                rows.append(row)
                successes += int(result.success)
                times.append(result.total_s)
                if result.success:
                    success_times.append(result.total_s)
                term = result.spiral_outcome.termination if result.spiral_outcome else "none"
                terminations[term] = terminations.get(term, 0) + 1
                if episode_idx == 0:
                    if result.servo_trace is not None:
                        result.servo_trace.write_jsonl(out_dir / "traces" / f"{cell_id}_servo.jsonl")
                    if result.spiral_trace:
                        from .spiral import write_spiral_trace

                        write_spiral_trace(result.spiral_trace, out_dir / "traces" / f"{cell_id}_spiral.jsonl")

            n = suite.episodes_per_cell
            cells_aggregate.append({
                "cell": cell_id,
                "predictor": cell.predictor_label,
                "servo": cell.servo_enabled,
                "offset_x_mm": cell.offset.x,
                "offset_y_mm": cell.offset.y,
                "offset_mm": cell.offset.norm(),
                "episodes": n,
                "successes": successes,
                "success_rate": successes / n if n else 0.0,
                "mean_total_s": statistics.fmean(times) if times else None,
                "median_total_s": statistics.median(times) if times else None,
                "mean_success_total_s": statistics.fmean(success_times) if success_times else None,
                "spiral_terminations": dict(sorted(terminations.items())),
            })

    csv_text = io.StringIO()
    writer = csv.DictWriter(csv_text, fieldnames=CSV_FIELDS)
    writer.writeheader()
    writer.writerows(rows)
    (out_dir / "suite.csv").write_text(csv_text.getvalue())

    aggregates = {
        "name": suite.name,
        "seed": suite.seed,
        "episodes_per_cell": suite.episodes_per_cell,
        "error_count": error_count,
        "cells": cells_aggregate,
    }
    (out_dir / "aggregates.json").write_text(json.dumps(aggregates, indent=2) + "\n")
    return SuiteReport(out_dir, rows, aggregates, error_count)


def compare_reports(path_a: str | Path, path_b: str | Path) -> dict:
    """Cell-by-cell comparison of two aggregate reports.

    Cells are matched on (offset, predictor, servo). Reports success-rate and
    mean-time deltas (B minus A) so directional claims are easy to read off.
    """
    a = json.loads(Path(path_a).read_text())
    b = json.loads(Path(path_b).read_text())

    def key(cell):
        return (round(cell["offset_mm"], 6), cell["predictor"], cell["servo"])

    cells_b = {key(c): c for c in b["cells"]}
    matched = []
    for cell in a["cells"]:
        other = cells_b.get(key(cell))
        if other is None:
            continue
        mean_a, mean_b = cell["mean_total_s"], other["mean_total_s"]
        matched.append({
            "offset_mm": cell["offset_mm"],
            "predictor": cell["predictor"],
            "servo": cell["servo"],
            "success_rate_a": cell["success_rate"],
            "success_rate_b": other["success_rate"],
            "success_rate_delta": other["success_rate"] - cell["success_rate"],
            "mean_total_a_s": mean_a,
            "mean_total_b_s": mean_b,
            "mean_total_delta_s": (mean_b - mean_a) if (mean_a is not None and mean_b is not None) else None,
        })
    return {
        "report_a": str(path_a),
        "report_b": str(path_b),
        "matched_cells": len(matched),
        "unmatched_a": len(a["cells"]) - len(matched),
        "unmatched_b": len(b["cells"]) - len(matched),
        "cells": matched,
    }
