"""JSON configuration for episodes, suites, and predictor construction.

Every randomized quantity is driven by an explicit unsigned 64-bit seed;
suites derive per-episode child seeds so results are reproducible and
independent of execution order.
"""

from __future__ import annotations

import contextlib
import json
from dataclasses import dataclass, field
from pathlib import Path

from .contact import ContactParams, ImpedanceParams
from .harness import EpisodeConfig, SuiteCell
from .predictors import (
    REFERENCE_STATS,
    ExternalPredictor,
    OraclePredictor,
    PredictorStats,
    StochasticPredictor,
)
from .protocol import ChildProcessEndpoint, TcpEndpoint
from .servo import ServoParams
from .spiral import SpiralParams
from .world import FrameScale, Vec2mm


class ConfigError(ValueError):
    pass


def _take(data: dict, cls, key: str):
    """Build a params dataclass from an optional sub-dict of config keys."""
    sub = data.get(key)
    if sub is None:
        return cls()
    if not isinstance(sub, dict):
        raise ConfigError(f"{key!r} must be an object")
    try:
        return cls(**{k: tuple(v) if isinstance(v, list) else v for k, v in sub.items()})
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad {key!r} section: {exc}") from exc


def _parse_offset(value) -> Vec2mm:
    if isinstance(value, (int, float)):
        return Vec2mm(float(value), 0.0)
    if isinstance(value, (list, tuple)) and len(value) == 2:
        return Vec2mm(float(value[0]), float(value[1]))
    raise ConfigError(f"offset must be a scalar (placed along +x) or [x, y], got {value!r}")


def predictor_label(spec: dict) -> str:
    kind = spec.get("kind", "oracle")
    if kind == "stochastic":
        return f"stochastic:{spec.get('stats_key', 'custom')}"
    if kind == "external":
        return "external"
    return kind


def resolve_stats(spec: dict) -> PredictorStats:
    if "stats_key" in spec:
        key = spec["stats_key"]
        if key not in REFERENCE_STATS:
            raise ConfigError(
                f"unknown stats key {key!r}; known keys: {', '.join(sorted(REFERENCE_STATS))}"
            )
        return REFERENCE_STATS[key]
    if "stats" in spec:
        stats = spec["stats"]
        try:
            return PredictorStats(
                mse_no_outlier=float(stats["mse_no_outlier"]),
                r_outlier=float(stats["r_outlier"]),
                r_quadrant=stats.get("r_quadrant"),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"bad stochastic stats: {exc}") from exc
    raise ConfigError("stochastic predictor needs 'stats_key' or 'stats'")


def build_predictor(spec: dict, seed: int, endpoint=None):
    """Instantiate the predictor described by a config spec.

    External predictors reuse an already open endpoint when one is passed
    (suites share one process across episodes); otherwise they open their
    own child process or TCP connection.
    """
    kind = spec.get("kind", "oracle")
    if kind == "oracle":
        return OraclePredictor()
    if kind == "stochastic":
        return StochasticPredictor(
            stats=resolve_stats(spec),
            seed=seed,
            position_range=tuple(spec.get("position_range", (-66.0, 66.0))),
            latency=float(spec.get("latency_s", 1.0)),
        )
    if kind == "external":
        if endpoint is None:
            endpoint = open_endpoint(spec)
        return ExternalPredictor(
            endpoint,
            latency_mode=spec.get("latency_mode", "measured"),
            fixed_latency=float(spec.get("latency_s", 1.0)),
        )
    raise ConfigError(f"unknown predictor kind {kind!r}")


def open_endpoint(spec: dict):
    timeout = float(spec.get("timeout_s", 5.0))
    if "cmd" in spec:
        return ChildProcessEndpoint(list(spec["cmd"]), timeout=timeout, cwd=spec.get("cwd"))
    if "host" in spec and "port" in spec:
        return TcpEndpoint(spec["host"], int(spec["port"]), timeout=timeout)
    raise ConfigError("external predictor needs 'cmd' or 'host'+'port'")


def parse_episode_config(data: dict, seed_override: int | None = None) -> EpisodeConfig:
    if "initial_offset_mm" not in data:
        raise ConfigError("episode config needs 'initial_offset_mm'")
    try:
        return EpisodeConfig(
            initial_offset=_parse_offset(data["initial_offset_mm"]),
            predictor_spec=data.get("predictor", {"kind": "oracle"}),
            servo_enabled=bool(data.get("servo_enabled", True)),
            time_budget_s=float(data.get("time_budget_s", 90.0)),
            seed=int(seed_override if seed_override is not None else data.get("seed", 0)),
            scale=FrameScale(float(data.get("scale_px_per_mm", 1.65))),
            servo=_take(data, ServoParams, "servo"),
            spiral=_take(data, SpiralParams, "spiral"),
            contact=_take(data, ContactParams, "contact"),
            impedance=_take(data, ImpedanceParams, "impedance"),
            approach_time_s=float(data.get("approach_time_s", 1.0)),
            background_value=int(data.get("background_value", 200)),
            workspace_half_width_mm=float(data.get("workspace_half_width_mm", 100.0)),
        )
    except (ValueError, TypeError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"bad episode config: {exc}") from exc


@dataclass
class SuiteConfig:
    name: str
    offsets: list[Vec2mm]
    predictor_specs: list[dict]
    servo_modes: list[bool]
    episodes_per_cell: int
    seed: int = 0
    episode_template: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.episodes_per_cell < 0:
            raise ConfigError("episodes_per_cell cannot be negative")
        if not self.offsets or not self.predictor_specs or not self.servo_modes:
            raise ConfigError("suite needs offsets, predictors and servo modes")

    def cells(self) -> list[SuiteCell]:
        out = []
        for spec in self.predictor_specs:
            for servo_enabled in self.servo_modes:
                for offset in self.offsets:
                    out.append(SuiteCell(offset, spec, predictor_label(spec), servo_enabled))
        return out


def parse_suite_config(data: dict, seed_override: int | None = None) -> SuiteConfig:
    try:
        offsets = [_parse_offset(v) for v in data["offsets_mm"]]
        predictors = data.get("predictors", [{"kind": "oracle"}])
        servo_modes = [bool(v) for v in data.get("servo_modes", [True])]
        template = {
            k: v
            for k, v in data.items()
            if k in ("time_budget_s", "scale_px_per_mm", "servo", "spiral", "contact",
                     "impedance", "approach_time_s", "background_value",
                     "workspace_half_width_mm")
        }
        return SuiteConfig(
            name=str(data.get("name", "experiment")),
            offsets=offsets,
            predictor_specs=list(predictors),
            servo_modes=servo_modes,
            episodes_per_cell=int(data.get("episodes_per_cell", 1)),
            seed=int(seed_override if seed_override is not None else data.get("seed", 0)),
            episode_template=template,
        )
    except KeyError as exc:
        raise ConfigError(f"suite config missing {exc}") from exc
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"bad suite config: {exc}") from exc


def make_episode_config(suite: SuiteConfig, cell: SuiteCell, seed: int) -> EpisodeConfig:
    data = dict(suite.episode_template)
    data["initial_offset_mm"] = [cell.offset.x, cell.offset.y]
    data["predictor"] = cell.predictor_spec
    data["servo_enabled"] = cell.servo_enabled
    return parse_episode_config(data, seed_override=seed)


@contextlib.contextmanager
def open_shared_endpoints(suite: SuiteConfig):
    """One endpoint per external predictor spec, shared by all its episodes."""
    endpoints: dict[str, object] = {}
    try:
        for spec in suite.predictor_specs:
            if spec.get("kind") == "external":
                endpoints[predictor_label(spec)] = open_endpoint(spec)
        yield endpoints
    finally:
        for endpoint in endpoints.values():
            endpoint.close()


def load_json(path: str | Path) -> dict:
    try:
        return json.loads(Path(path).read_text())
    except FileNotFoundError as exc:
        raise ConfigError(f"config file not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON: {exc}") from exc
