"""Command-line surface.

Subcommands: gen-data, eval-predictor, run-episode, run-experiment, compare,
plot. Exit codes: 0 on success, 2 on configuration errors, 3 when a suite
completed with partial failures (episodes that errored out).
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .config import (
    ConfigError,
    build_predictor,
    load_json,
    parse_episode_config,
    parse_suite_config,
)
from .dataset import DatasetError, DatasetManifest, generate_dataset
from .harness import compare_reports, eval_predictor, run_episode, run_experiment
from .seeding import child_seed

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_PARTIAL = 3


def _cmd_gen_data(args) -> int:
    manifest = DatasetManifest.from_json_dict(load_json(args.manifest))
    if args.seed is not None:
        manifest.seed = args.seed
    result = generate_dataset(manifest, args.out)
    print(f"wrote {result.sample_count} samples to {result.out_dir}")
    return EXIT_OK


def _cmd_eval_predictor(args) -> int:
    config = load_json(args.config)
    if "dataset" not in config or "predictor" not in config:
        raise ConfigError("eval config needs 'dataset' and 'predictor'")
    seed = args.seed if args.seed is not None else int(config.get("seed", 0))
    predictor = build_predictor(config["predictor"], child_seed(seed, "eval"))
    try:
        report = eval_predictor(config["dataset"], predictor)
    finally:
        close = getattr(predictor, "close", None)
        if close:
            close()
    text = json.dumps(report.to_json_dict(), indent=2)
    print(text)
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "metrics.json").write_text(text + "\n")
    return EXIT_OK


def _cmd_run_episode(args) -> int:
    config = parse_episode_config(load_json(args.config), seed_override=args.seed)
    result = run_episode(config)
    summary = result.to_row()
    print(json.dumps(summary, indent=2))
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "episode.json").write_text(json.dumps(summary, indent=2) + "\n")
        if result.servo_trace is not None:
            result.servo_trace.write_jsonl(out / "servo_trace.jsonl")
        if result.spiral_trace:
            from .spiral import write_spiral_trace

            write_spiral_trace(result.spiral_trace, out / "spiral_trace.jsonl")
        if result.insertion_trace:
            import csv as _csv

            with (out / "insertion_trace.csv").open("w", newline="") as fh:
                writer = _csv.writer(fh)
                writer.writerow(["t_s", "depth_mm", "force_z_n", "offset_x_mm", "offset_y_mm"])
                for row in result.insertion_trace:
                    writer.writerow([row.t_s, row.depth_mm, row.force_z_n,
                                     row.offset_x_mm, row.offset_y_mm])
    return EXIT_OK if result.success else EXIT_OK


def _cmd_run_experiment(args) -> int:
    suite = parse_suite_config(load_json(args.config), seed_override=args.seed)
    report = run_experiment(suite, args.out)
    print(f"suite '{suite.name}': {len(report.rows)} episodes, "
          f"{report.error_count} errors -> {report.out_dir}")
    return EXIT_PARTIAL if report.error_count else EXIT_OK


def _cmd_compare(args) -> int:
    comparison = compare_reports(args.report_a, args.report_b)
    text = json.dumps(comparison, indent=2)
    print(text)
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "comparison.json").write_text(text + "\n")
    return EXIT_OK


def _cmd_plot(args) -> int:
    from . import plotting

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    if args.kind == "times":
        path = plotting.plot_times(args.input, out / "times.svg")
    elif args.kind == "servo":
        path = plotting.plot_servo_trace(args.input, out / "servo.svg")
    elif args.kind == "spiral":
        path = plotting.plot_spiral_trace(args.input, out / "spiral.svg")
    else:  # pragma: no cover - argparse restricts choices
        raise ConfigError(f"unknown plot kind {args.kind}")
    print(f"wrote {path}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="peginhole")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-data", help="generate a synthetic dataset from a manifest")
    p.add_argument("--manifest", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int)
    p.set_defaults(fn=_cmd_gen_data)

    p = sub.add_parser("eval-predictor", help="evaluate a predictor over a dataset")
    p.add_argument("--config", required=True)
    p.add_argument("--seed", type=int)
    p.add_argument("--out")
    p.set_defaults(fn=_cmd_eval_predictor)

    p = sub.add_parser("run-episode", help="run a single seeded episode")
    p.add_argument("--config", required=True)
    p.add_argument("--seed", type=int)
    p.add_argument("--out")
    p.set_defaults(fn=_cmd_run_episode)

    p = sub.add_parser("run-experiment", help="run a suite of seeded episodes")
    p.add_argument("--config", required=True)
    p.add_argument("--seed", type=int)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=_cmd_run_experiment)

    p = sub.add_parser("compare", help="compare two aggregate reports")
    p.add_argument("report_a")
    p.add_argument("report_b")
    p.add_argument("--out")
    p.set_defaults(fn=_cmd_compare)

    p = sub.add_parser("plot", help="emit SVG charts from suite/trace files")
    p.add_argument("--kind", choices=("times", "servo", "spiral"), required=True)
    p.add_argument("--input", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=_cmd_plot)

    return parser


def main(argv: list[str] | None = None) -> int:
    from .protocol import ProtocolError

    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except (ConfigError, DatasetError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ProtocolError as exc:
        # endpoints that cannot even start are configuration problems
        print(f"config error: endpoint unavailable: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
