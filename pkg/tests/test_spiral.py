import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from peginhole.contact import ContactParams
from peginhole.spiral import (
    SpiralError,
    SpiralParams,
    max_steps,
    run_spiral,
    spiral_point,
    write_spiral_trace,
)
from peginhole.world import Vec2mm, WorldState

DEFAULTS = SpiralParams()
CONTACT = ContactParams()


def sweep_chord_points(params: SpiralParams, samples_per_chord: int = 40) -> np.ndarray:
    """Independent dense oracle for the swept path: the peg moves in straight
    chords between waypoints, starting from the sweep center. Returns points
    in the center frame, shape (N, 2)."""
    waypoints = [(0.0, 0.0)]
    k = 0
    while True:
        theta = k * params.step_deg
        r = params.start_radius_mm + params.pitch_mm * theta / 360.0
        if r > params.max_radius_mm:
            break
        waypoints.append((r * math.cos(math.radians(theta)),
                          r * math.sin(math.radians(theta))))
        k += 1
    pts = []
    for (x0, y0), (x1, y1) in zip(waypoints, waypoints[1:]):
        ts = np.linspace(0.0, 1.0, samples_per_chord, endpoint=False)
        pts.append(np.column_stack([x0 + ts * (x1 - x0), y0 + ts * (y1 - y0)]))
    pts.append(np.array([waypoints[-1]]))
    return np.vstack(pts)


def golden_min_distance(path: np.ndarray, offset: Vec2mm) -> float:
    """Min distance from the swept path to the hole: coarse numpy scan plus
    golden-section refinement on the bracketing chord."""
    d = np.hypot(path[:, 0] + offset.x, path[:, 1] + offset.y)
    i = int(np.argmin(d))
    lo, hi = max(0, i - 1), min(len(path) - 1, i + 1)
    a, b = path[lo], path[hi]

    def dist(t):
        x = a[0] + t * (b[0] - a[0]) + offset.x
        y = a[1] + t * (b[1] - a[1]) + offset.y
        return math.hypot(x, y)

    phi = (math.sqrt(5) - 1) / 2
    left, right = 0.0, 1.0
    c = right - phi * (right - left)
    e = left + phi * (right - left)
    for _ in range(80):
        if dist(c) < dist(e):
            right = e
        else:
            left = c
        c = right - phi * (right - left)
        e = left + phi * (right - left)
    return min(d[i], dist((left + right) / 2))


class TestSpiralPoint:
    def test_first_waypoint_sits_at_start_radius(self):
        p = spiral_point(0, DEFAULTS)
        assert (p.x, p.y) == (0.3, 0.0)

    def test_waypoint_one_matches_high_precision_value(self):
        p = spiral_point(1, DEFAULTS)
        assert p.x == pytest.approx(0.303058552210145982, abs=1e-12)
        assert p.y == pytest.approx(0.067186463493286102, abs=1e-12)

    def test_radius_grows_one_pitch_per_rotation(self):
        def radius_at(theta_deg):
            return DEFAULTS.start_radius_mm + DEFAULTS.pitch_mm * theta_deg / 360.0

        assert radius_at(360.0) == pytest.approx(0.6, abs=1e-12)
        for theta in (0.0, 123.4, 1000.0):
            assert radius_at(theta + 360.0) - radius_at(theta) == pytest.approx(
                DEFAULTS.pitch_mm, abs=1e-9
            )

    def test_radius_nondecreasing_in_k(self):
        radii = [spiral_point(k, DEFAULTS).norm() for k in range(400)]
        assert all(b >= a - 1e-12 for a, b in zip(radii, radii[1:]))

    def test_negative_index_rejected(self):
        with pytest.raises(SpiralError):
            spiral_point(-1, DEFAULTS)

    def test_param_validation(self):
        with pytest.raises(SpiralError):
            SpiralParams(start_radius_mm=8.0, max_radius_mm=7.0)
        with pytest.raises(SpiralError):
            SpiralParams(step_deg=0)


class TestRunSpiral:
    def test_capture_at_start_means_zero_steps(self):
        world = WorldState(peg_offset=Vec2mm(0.1, 0))
        out = run_spiral(world, CONTACT, DEFAULTS)
        assert out.found and out.steps == 0 and out.termination == "force_drop"

    def test_hole_directly_under_start(self):
        world = WorldState(peg_offset=Vec2mm(0, 0))
        out = run_spiral(world, CONTACT, DEFAULTS)
        assert out.found and out.steps == 0

    def test_far_hole_exceeds_radius(self):
        world = WorldState(peg_offset=Vec2mm(10.0, 0))
        out = run_spiral(world, CONTACT, DEFAULTS)
        assert not out.found and out.termination == "r_exceeded"

    def test_termination_bound(self):
        bound = max_steps(DEFAULTS)
        assert bound == 645
        world = WorldState(peg_offset=Vec2mm(10.0, 0))
        out = run_spiral(world, CONTACT, DEFAULTS)
        assert out.steps <= bound

    def test_found_position_is_captured(self):
        world = WorldState(peg_offset=Vec2mm(4.0, 0))
        out = run_spiral(world, CONTACT, DEFAULTS)
        assert out.found
        assert world.peg_offset.norm() <= CONTACT.capture_radius_mm + 1e-12

    def test_deadline_aborts(self):
        world = WorldState(peg_offset=Vec2mm(10.0, 0))
        world.advance(89.0)
        out = run_spiral(world, CONTACT, DEFAULTS, deadline_s=90.0)
        assert out.termination == "budget_exhausted"
        assert world.sim_time <= 90.0 + DEFAULTS.step_time_s

    def test_time_charged_per_step(self):
        world = WorldState(peg_offset=Vec2mm(10.0, 0))
        out = run_spiral(world, CONTACT, DEFAULTS)
        assert world.sim_time == pytest.approx(out.steps * DEFAULTS.step_time_s)

    def test_trace_rows(self, tmp_path):
        world = WorldState(peg_offset=Vec2mm(1.0, 0))
        rows = []
        out = run_spiral(world, CONTACT, DEFAULTS, trace=rows)
        assert out.found
        assert len(rows) == out.steps
        assert rows[0].k == 0 and rows[0].r_mm == pytest.approx(0.3)
        write_spiral_trace(rows, tmp_path / "trace.jsonl")
        assert (tmp_path / "trace.jsonl").read_text().count("\n") == len(rows)

    @settings(max_examples=50, deadline=None)
    @given(st.floats(0, 2 * math.pi), st.floats(0, 6.5))
    def test_coverage_agrees_with_dense_oracle(self, angle, magnitude):
        offset = Vec2mm(magnitude * math.cos(angle), magnitude * math.sin(angle))
        world = WorldState(peg_offset=offset)
        out = run_spiral(world, CONTACT, DEFAULTS)
        oracle_min = golden_min_distance(_PATH, offset)
        assert out.found == (oracle_min <= CONTACT.capture_radius_mm)


_PATH = sweep_chord_points(DEFAULTS)
