"""Synthetic dataset generation: stratified hole positions, randomized hole
appearance, background selection by category, and reproducible persistence.

Output layout under the target directory:

    backgrounds/<category>/NNN.pgm   materialized source images
    images/NNNNNN.pgm                rendered samples
    labels.jsonl                     one record per sample
    manifest.json                    resolved manifest (seeds included)

A ``_INCOMPLETE`` marker exists while generation runs and is removed on
success, so partially written runs are identifiable.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path



from .backgrounds import CATEGORY_NAMES, make_category_sources
from .camera import (
    DEFAULT_VIEW_SIZE,
    GripperMask,
    RenderParams,
    make_procedural_mask,
    render_concat_view,
)
from .image import GrayImage, read_pgm, write_pgm
from .seeding import child_rng, child_seed
from .world import FrameScale, PegSpec, Vec2px, Vec2mm, WorldState, px_to_mm, round_px


class DatasetError(ValueError):
    pass


@dataclass(frozen=True)
class RandomizationRanges:
    position_px: tuple[int, int] = (-66, 66)
    darkness: tuple[int, int] = (10, 70)
    diameter_px: tuple[float, float] = (10.0, 35.0)

    def __post_init__(self):
        if self.position_px[0] >= 0 or self.position_px[1] <= 0:
            raise DatasetError("position range must straddle zero")
        if not (0 <= self.darkness[0] <= self.darkness[1] <= 255):
            raise DatasetError("darkness range must be an 8-bit subinterval")
        if not (0 < self.diameter_px[0] <= self.diameter_px[1]):
            raise DatasetError("diameter range must be positive")


@dataclass(frozen=True)
class CategorySpec:
    """How many source images to take from a category.

    ``source_dir`` points at user-supplied PGM files; when absent the
    procedural stand-in generator materializes the sources.
    """

    name: str
    count: int
    source_dir: str | None = None

    def __post_init__(self):
        if self.name not in CATEGORY_NAMES:
            raise DatasetError(f"unknown category {self.name!r}")
        if self.count < 1:
            raise DatasetError("category count must be at least 1")


@dataclass
class DatasetManifest:
    name: str
    categories: list[CategorySpec]
    positions_per_image: int
    ranges: RandomizationRanges = field(default_factory=RandomizationRanges)
    seed: int = 0
    noise_sigma: float = 8.0
    render_scale: float = 1.0

    def __post_init__(self):
        if not self.categories:
            raise DatasetError("manifest needs at least one category")
        if self.positions_per_image < 4 or self.positions_per_image % 4:
            raise DatasetError("positions_per_image must be a positive multiple of 4")
        size = DEFAULT_VIEW_SIZE * self.render_scale
        if not (0 < self.render_scale <= 1.0) or size != int(size) or int(size) % 2:
            raise DatasetError("render_scale must give an even integer canvas size")

    @property
    def view_size(self) -> int:
        return int(DEFAULT_VIEW_SIZE * self.render_scale)

    @property
    def background_count(self) -> int:
        return sum(c.count for c in self.categories)

    @property
    def sample_count(self) -> int:
        return self.background_count * self.positions_per_image

    def to_json_dict(self) -> dict:
        return {
            "name": self.name,
            "categories": [
                {"name": c.name, "count": c.count, "source_dir": c.source_dir}
                for c in self.categories
            ],
            "positions_per_image": self.positions_per_image,
            "ranges": {
                "position_px": list(self.ranges.position_px),
                "darkness": list(self.ranges.darkness),
                "diameter_px": list(self.ranges.diameter_px),
            },
            "seed": self.seed,
            "noise_sigma": self.noise_sigma,
            "render_scale": self.render_scale,
            "sample_count": self.sample_count,
            "file_layout": "backgrounds/<category>/NNN.pgm, images/NNNNNN.pgm, labels.jsonl",
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> "DatasetManifest":
        ranges = data.get("ranges", {})
        return cls(
            name=data["name"],
            categories=[
                CategorySpec(c["name"], int(c["count"]), c.get("source_dir"))
                for c in data["categories"]
            ],
            positions_per_image=int(data["positions_per_image"]),
            ranges=RandomizationRanges(
                position_px=tuple(ranges.get("position_px", (-66, 66))),
                darkness=tuple(ranges.get("darkness", (10, 70))),
                diameter_px=tuple(ranges.get("diameter_px", (10.0, 35.0))),
            ),
            seed=int(data.get("seed", 0)),
            noise_sigma=float(data.get("noise_sigma", 8.0)),
            render_scale=float(data.get("render_scale", 1.0)),
        )


@dataclass(frozen=True)
class DatasetSample:
    index: int
    image_path: str
    label: Vec2px
    darkness: int
    diameter_px: float
    background_id: str
    seed: int


def sample_positions(
    n_per_quadrant: int, position_range: tuple[int, int], seed: int
) -> list[Vec2px]:
    """Stratified jittered-grid positions: exactly n per quadrant, none on axis.

    Each quadrant gets its own sqrt-sized grid; one jittered point is drawn in
    each of n shuffled cells and rounded to integer pixels, so coverage is
    even while remaining seedable.
    """
    if n_per_quadrant < 1:
        raise DatasetError("need at least one position per quadrant")
    lo, hi = position_range
    grid = math.ceil(math.sqrt(n_per_quadrant))
    if grid > hi or grid > -lo:
        raise DatasetError(
            f"position range {position_range} too narrow to host a {grid}x{grid} grid"
        )

    positions: list[Vec2px] = []
    for qi, (sx, sy) in enumerate(((1, 1), (-1, 1), (-1, -1), (1, -1))):
        extent_x = hi if sx > 0 else -lo
        extent_y = hi if sy > 0 else -lo
        rng = child_rng(seed, "positions", qi)
        cells = rng.permutation(grid * grid)[:n_per_quadrant]
        for cell in cells:
            ci, cj = divmod(int(cell), grid)
            # jitter inside the cell, then round into [1, extent]
            u = (ci + rng.uniform()) / grid * (extent_x - 1) + 1
            v = (cj + rng.uniform()) / grid * (extent_y - 1) + 1
            x = min(extent_x, max(1, round_px(u)))
            y = min(extent_y, max(1, round_px(v)))
            positions.append(Vec2px(sx * x, sy * y))
    return positions


def _world_for_label(label: Vec2px, scale: FrameScale) -> WorldState:
    offset = px_to_mm(Vec2px(-label.x, -label.y), scale)
    return WorldState(peg_offset=Vec2mm(offset.x, offset.y))


def synthesize_sample(
    background: GrayImage,
    background_id: str,
    position: Vec2px,
    ranges: RandomizationRanges,
    mask: GripperMask,
    seed: int,
    index: int,
    out_dir: Path,
    noise_sigma: float = 8.0,
    render_scale: float = 1.0,
    scale: FrameScale = FrameScale(),
) -> DatasetSample:
    """Render one sample: draw darkness/diameter, write the PGM, return metadata."""
    lo, hi = ranges.position_px
    if not (lo <= position.x <= hi and lo <= position.y <= hi):
        raise DatasetError(f"position {position} outside range {ranges.position_px}")
    rng = child_rng(seed, "appearance")
    darkness = int(rng.integers(ranges.darkness[0], ranges.darkness[1] + 1))
    diameter = float(rng.uniform(ranges.diameter_px[0], ranges.diameter_px[1]))
    render_seed = int(rng.integers(2**63))

    params = RenderParams(
        background=background,
        hole_center=Vec2px(position.x * render_scale, position.y * render_scale),
        hole_diameter_px=diameter * render_scale,
        hole_darkness=darkness,
        noise_sigma=noise_sigma,
        seed=render_seed,
    )
    image = render_concat_view(_world_for_label(position, scale), mask, params)
    rel_path = f"images/{index:06d}.pgm"
    write_pgm(image, out_dir / rel_path)
    return DatasetSample(
        index=index,
        image_path=rel_path,
        label=position,
        darkness=darkness,
        diameter_px=diameter,
        background_id=background_id,
        seed=seed,
    )


def _materialize_backgrounds(
    manifest: DatasetManifest, out_dir: Path
) -> list[tuple[str, GrayImage]]:
    size = manifest.view_size
    entries: list[tuple[str, GrayImage]] = []
    for spec in manifest.categories:
        cat_dir = out_dir / "backgrounds" / spec.name
        cat_dir.mkdir(parents=True, exist_ok=True)
        if spec.source_dir is None:
            sources = make_category_sources(spec.name, spec.count, manifest.seed, size)
        else:
            if manifest.render_scale != 1.0:
                raise DatasetError("user-supplied backgrounds require render_scale 1.0")
            files = sorted(Path(spec.source_dir).glob("*.pgm"))
            if len(files) < spec.count:
                raise DatasetError(
                    f"{spec.source_dir}: {len(files)} sources, need {spec.count}"
                )
            sources = [read_pgm(f) for f in files[: spec.count]]
        for i, img in enumerate(sources):
            bg_id = f"{spec.name}/{i:03d}"
            write_pgm(img, cat_dir / f"{i:03d}.pgm")
            entries.append((bg_id, img))
    return entries


@dataclass(frozen=True)
class GenerationResult:
    out_dir: Path
    sample_count: int
    labels_path: Path
    manifest_path: Path


def generate_dataset(manifest: DatasetManifest, out_dir: str | Path) -> GenerationResult:
    out_dir = Path(out_dir)
    (out_dir / "images").mkdir(parents=True, exist_ok=True)
    marker = out_dir / "_INCOMPLETE"
    marker.touch()

    mask = make_procedural_mask(PegSpec(), FrameScale(), size=manifest.view_size)
    backgrounds = _materialize_backgrounds(manifest, out_dir)
    ppi = manifest.positions_per_image

    labels_path = out_dir / "labels.jsonl"
    index = 0
    with labels_path.open("w", encoding="utf-8") as labels:
        for bi, (bg_id, bg_img) in enumerate(backgrounds):
            positions = sample_positions(
                ppi // 4, manifest.ranges.position_px, child_seed(manifest.seed, "image", bi)
            )
            for position in positions:
                sample = synthesize_sample(
                    background=bg_img,
                    background_id=bg_id,
                    position=position,
                    ranges=manifest.ranges,
                    mask=mask,
                    seed=child_seed(manifest.seed, "sample", index),
                    index=index,
                    out_dir=out_dir,
                    noise_sigma=manifest.noise_sigma,
                    render_scale=manifest.render_scale,
                )
                record = {
                    "index": sample.index,
                    "image": sample.image_path,
                    "x": int(sample.label.x),
                    "y": int(sample.label.y),
                    "darkness": sample.darkness,
                    "diameter": sample.diameter_px,
                    "background": sample.background_id,
                }
                labels.write(json.dumps(record) + "\n")
                index += 1

    manifest_path = out_dir / "manifest.json"
    manifest_path.write_text(json.dumps(manifest.to_json_dict(), indent=2) + "\n")
    marker.unlink()
    return GenerationResult(out_dir, index, labels_path, manifest_path)


def read_labels(dataset_dir: str | Path) -> list[dict]:
    labels_path = Path(dataset_dir) / "labels.jsonl"
    if not labels_path.exists():
        raise DatasetError(f"{dataset_dir}: no labels.jsonl (not a dataset directory?)")
    records = [json.loads(line) for line in labels_path.read_text().splitlines() if line]
    if not records:
        raise DatasetError(f"{dataset_dir}: empty dataset")
    return records


def load_sample_image(dataset_dir: str | Path, record: dict) -> GrayImage:
    return read_pgm(Path(dataset_dir) / record["image"])
