"""SVG chart emission for suite results and phase traces."""

from __future__ import annotations

import csv
import json
from collections import defaultdict
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)


def plot_times(suite_csv: str | Path, out_path: str | Path) -> Path:
    """Total episode time against initial offset, one series per cell kind.

    Failed episodes are drawn as open markers pinned at their recorded end
    time, so budget aborts and geometric failures stay visible.
    """
    rows = list(csv.DictReader(Path(suite_csv).open()))
    if not rows:
        raise ValueError(f"{suite_csv}: empty suite")
    series: dict[tuple[str, str], list[tuple[float, float, bool]]] = defaultdict(list)
    for row in rows:
        if row["total_s"] == "":
            continue
        key = (row["predictor"], "servo on" if row["servo"] == "1" else "servo off")
        series[key].append(
            (float(row["offset_mm"]), float(row["total_s"]), row["success"] == "1")
        )

    fig, ax = plt.subplots(figsize=(7, 4.5))
    for (predictor, servo), points in sorted(series.items()):
        points.sort()
        ok = [(o, t) for o, t, s in points if s]
        bad = [(o, t) for o, t, s in points if not s]
        label = f"{predictor}, {servo}"
        if ok:
            ax.plot([p[0] for p in ok], [p[1] for p in ok], "o-", ms=4, label=label)
        if bad:
            ax.plot([p[0] for p in bad], [p[1] for p in bad], "x", ms=6,
                    label=f"{label} (failed)")
    ax.set_xlabel("initial offset [mm]")
    ax.set_ylabel("episode time [s]")
    ax.grid(True, alpha=0.3)
    ax.legend(fontsize=8)
    out_path = Path(out_path)
    fig.savefig(out_path, format="svg", bbox_inches="tight")
    plt.close(fig)
    return out_path


def plot_servo_trace(trace_jsonl: str | Path, out_path: str | Path) -> Path:
    """Per-iteration offset components and the decaying step limit."""
    steps = [json.loads(line) for line in Path(trace_jsonl).read_text().splitlines() if line]
    if not steps:
        raise ValueError(f"{trace_jsonl}: empty trace")
    t = [s["t"] for s in steps]
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(t, [s["offset_x_mm"] for s in steps], "o-", label="offset x [mm]")
    ax.plot(t, [s["offset_y_mm"] for s in steps], "s-", label="offset y [mm]")
    ax.plot(t, [s["step_limit_mm"] for s in steps], "k--", label="step limit [mm]")
    ax.plot(t, [-s["step_limit_mm"] for s in steps], "k--")
    ax.set_xlabel("iteration")
    ax.set_ylabel("mm")
    ax.grid(True, alpha=0.3)
    ax.legend(fontsize=8)
    out_path = Path(out_path)
    fig.savefig(out_path, format="svg", bbox_inches="tight")
    plt.close(fig)
    return out_path


def plot_spiral_trace(trace_jsonl: str | Path, out_path: str | Path) -> Path:
    """Swept spiral path in the sweep-start frame, end point marked."""
    rows = [json.loads(line) for line in Path(trace_jsonl).read_text().splitlines() if line]
    if not rows:
        raise ValueError(f"{trace_jsonl}: empty trace")
    xs = [r["x_mm"] for r in rows]
    ys = [r["y_mm"] for r in rows]
    fig, ax = plt.subplots(figsize=(5, 5))
    ax.plot(xs, ys, "-", lw=0.8)
    ax.plot(xs[-1], ys[-1], "r*", ms=12, label="last waypoint")
    ax.set_aspect("equal")
    ax.set_xlabel("x [mm]")
    ax.set_ylabel("y [mm]")
    ax.grid(True, alpha=0.3)
    ax.legend(fontsize=8)
    out_path = Path(out_path)
    fig.savefig(out_path, format="svg", bbox_inches="tight")
    plt.close(fig)
    return out_path
