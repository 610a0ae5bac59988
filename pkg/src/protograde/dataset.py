"""Embedding dataset format (.embl), validation, pooling, and synthesis.

An .embl file is line-delimited JSON: one header object followed by one
record object per line (UTF-8, LF).  Records carry either a pooled vector
("vec") or a frame matrix ("frames"); frames are pooled lazily by callers
via :func:`mean_pool` so both payload forms stay first-class.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import DataError

HEADER_SCHEMA = "emb-v1"
SPLITS = ("train", "valid", "test")


@dataclass(frozen=True)
class LevelSchema:
    """Ordered proficiency level names; a level's ordinal index is its position."""

    names: tuple[str, ...]

    def __post_init__(self):
        names = tuple(self.names)
        object.__setattr__(self, "names", names)
        if len(names) < 2:
            raise DataError(f"need at least 2 levels, got {len(names)}")
        if any(not isinstance(n, str) or not n for n in names):
            raise DataError("level names must be non-empty strings")
        if len(set(names)) != len(names):
            raise DataError(f"level names must be unique: {list(names)}")

    @property
    def num_levels(self) -> int:
        return len(self.names)

    def index(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise DataError(f"unknown level name {name!r}, expected one of {list(self.names)}") from None


@dataclass
class EmbeddingRecord:
    """One learner response: pooled vector or frame matrix plus metadata."""

    id: str
    label: int
    split: str
    group: str | None = None
    vec: np.ndarray | None = None
    frames: np.ndarray | None = None


@dataclass
class Dataset:
    """Immutable-by-convention collection of records sharing one dimension."""

    schema: LevelSchema
    dim: int
    records: tuple[EmbeddingRecord, ...]
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.records = tuple(self.records)

    def __len__(self) -> int:
        return len(self.records)

    def split_records(self, split: str) -> list[EmbeddingRecord]:
        if split not in SPLITS:
            raise DataError(f"unknown split {split!r}, expected one of {list(SPLITS)}")
        return [r for r in self.records if r.split == split]


def mean_pool(frames) -> np.ndarray:
    """Column-wise arithmetic mean over the rows of a frame matrix."""
    arr = np.asarray(frames, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[0] < 1:
        raise DataError(f"mean_pool expects a non-empty 2-D frame matrix, got shape {arr.shape}")
    return arr.mean(axis=0)


def pooled_vector(record: EmbeddingRecord) -> np.ndarray:
    """Return the record's vector, pooling frames on demand."""
    if record.vec is not None:
        return record.vec
    return mean_pool(record.frames)


def split_matrix(dataset: Dataset, split: str):
    """Pooled design matrix for one split: (X, labels, groups, ids)."""
    recs = dataset.split_records(split)
    if not recs:
        raise DataError(f"split {split!r} contains zero records")
    X = np.stack([pooled_vector(r) for r in recs])
    y = np.array([r.label for r in recs], dtype=np.int64)
    groups = [r.group for r in recs]
    ids = [r.id for r in recs]
    return X, y, groups, ids


def class_frequencies(dataset: Dataset, split: str):
    """Per-level (counts, frequencies) over one split; frequencies sum to 1."""
    recs = dataset.split_records(split)
    if not recs:
        raise DataError(f"split {split!r} contains zero records")
    counts = np.bincount([r.label for r in recs], minlength=dataset.schema.num_levels)
    return counts, counts / counts.sum()


def _parse_numbers(value, what: str, lineno: int):
    arr = np.asarray(value, dtype=np.float64)
    if not np.all(np.isfinite(arr)):
        raise DataError(f"line {lineno}: non-finite value in {what}")
    return arr


def load_dataset(path) -> Dataset:
    """Load and validate an .embl file.

    Every record is checked against the header (dimension, label range,
    split name, exactly one payload); errors report the offending line.
    """
    with open(path, encoding="utf-8") as fh:
        first = fh.readline()
        if not first.strip():
            raise DataError(f"{path}: missing header line")
        try:
            header = json.loads(first)
        except json.JSONDecodeError as exc:
            raise DataError(f"{path}: line 1: header is not valid JSON ({exc.msg})") from None
        if not isinstance(header, dict) or header.get("schema") != HEADER_SCHEMA:
            raise DataError(
                f"{path}: line 1: bad header, expected object with schema={HEADER_SCHEMA!r}"
            )
        dim = header.get("dim")
        if not isinstance(dim, int) or dim < 1:
            raise DataError(f"{path}: line 1: header dim must be a positive integer, got {dim!r}")
        levels = header.get("levels")
        if not isinstance(levels, list):
            raise DataError(f"{path}: line 1: header levels must be a list of names")
        schema = LevelSchema(tuple(levels))
        meta = {k: v for k, v in header.items() if k not in ("schema", "dim", "levels")}

        records = []
        for lineno, line in enumerate(fh, start=2):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise DataError(f"line {lineno}: record is not valid JSON ({exc.msg})") from None
            records.append(_parse_record(obj, schema, dim, lineno))

    return Dataset(schema=schema, dim=dim, records=tuple(records), meta=meta)


def _parse_record(obj, schema: LevelSchema, dim: int, lineno: int) -> EmbeddingRecord:
    if not isinstance(obj, dict):
        raise DataError(f"line {lineno}: record must be a JSON object")
    rec_id = obj.get("id")
    if not isinstance(rec_id, str) or not rec_id:
        raise DataError(f"line {lineno}: record id must be a non-empty string")
    split = obj.get("split")
    if split not in SPLITS:
        raise DataError(f"line {lineno}: record {rec_id!r}: unknown split {split!r}")
    label = obj.get("label")
    if not isinstance(label, int) or not (0 <= label < schema.num_levels):
        raise DataError(
            f"line {lineno}: record {rec_id!r}: label {label!r} out of range "
            f"0..{schema.num_levels - 1}"
        )
    group = obj.get("group")
    if group is not None and not isinstance(group, str):
        raise DataError(f"line {lineno}: record {rec_id!r}: group must be a string or null")

    has_vec = "vec" in obj and obj["vec"] is not None
    has_frames = "frames" in obj and obj["frames"] is not None
    if has_vec == has_frames:
        raise DataError(
            f"line {lineno}: record {rec_id!r}: exactly one of vec/frames must be present"
        )
    vec = frames = None
    if has_vec:
        vec = _parse_numbers(obj["vec"], f"record {rec_id!r} vec", lineno)
        if vec.ndim != 1 or vec.shape[0] != dim:
            raise DataError(
                f"line {lineno}: record {rec_id!r}: vec has length "
                f"{vec.shape[0] if vec.ndim == 1 else list(vec.shape)}, expected dim {dim}"
            )
    else:
        frames = _parse_numbers(obj["frames"], f"record {rec_id!r} frames", lineno)
        if frames.ndim != 2 or frames.shape[0] < 1 or frames.shape[1] != dim:
            raise DataError(
                f"line {lineno}: record {rec_id!r}: frames must be a T x {dim} matrix "
                f"with T >= 1, got shape {list(frames.shape)}"
            )
    return EmbeddingRecord(id=rec_id, label=label, split=split, group=group, vec=vec, frames=frames)


def save_dataset(dataset: Dataset, path) -> None:
    """Write an .embl file; numeric payloads round-trip exactly through JSON."""
    header = {"schema": HEADER_SCHEMA, "dim": dataset.dim, "levels": list(dataset.schema.names)}
    for key in sorted(dataset.meta):
        header[key] = dataset.meta[key]
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(json.dumps(header) + "\n")
        for rec in dataset.records:
            obj = {"id": rec.id, "group": rec.group, "split": rec.split, "label": rec.label}
            if rec.vec is not None:
                obj["vec"] = rec.vec.tolist()
            else:
                obj["frames"] = rec.frames.tolist()
            fh.write(json.dumps(obj) + "\n")


@dataclass(frozen=True)
class SynthParams:
    """Parameters of the synthetic imbalanced-ordinal generator.

    Level-j samples are isotropic Gaussians of width noise_sigma centered at
    gap_positions[j] along one seed-derived random unit direction, so the
    inter-level spacing is deliberately non-uniform.
    """

    dim: int
    counts: dict
    gap_positions: tuple[float, ...]
    noise_sigma: float
    seed: int
    level_names: tuple[str, ...] | None = None
    group_tags: tuple[str, ...] | None = None

    def __post_init__(self):
        if self.dim < 1:
            raise DataError(f"dim must be positive, got {self.dim}")
        gaps = tuple(float(g) for g in self.gap_positions)
        object.__setattr__(self, "gap_positions", gaps)
        if any(b <= a for a, b in zip(gaps, gaps[1:])):
            raise DataError(f"gap_positions must be strictly increasing, got {list(gaps)}")
        if not self.noise_sigma > 0:
            raise DataError(f"noise_sigma must be > 0, got {self.noise_sigma}")
        for split, counts in self.counts.items():
            if split not in SPLITS:
                raise DataError(f"unknown split {split!r} in counts")
            if len(counts) != len(gaps):
                raise DataError(
                    f"counts for split {split!r} must list one entry per level "
                    f"({len(gaps)}), got {len(counts)}"
                )
            if any(c < 0 for c in counts):
                raise DataError(f"counts must be >= 0, got {list(counts)}")
        if self.level_names is not None:
            object.__setattr__(self, "level_names", tuple(self.level_names))
            if len(self.level_names) != len(gaps):
                raise DataError("level_names length must match gap_positions")
        if self.group_tags is not None:
            object.__setattr__(self, "group_tags", tuple(self.group_tags))

    @property
    def num_levels(self) -> int:
        return len(self.gap_positions)


def gen_synthetic(params: SynthParams) -> Dataset:
    """Deterministically generate a synthetic dataset from SynthParams.

    All randomness flows from params.seed; per-level per-split counts are
    enforced exactly.
    """
    rng = np.random.default_rng(params.seed)
    direction = rng.normal(size=params.dim)
    direction /= np.linalg.norm(direction)

    names = params.level_names or default_level_names(params.num_levels)
    schema = LevelSchema(tuple(names))

    records = []
    for split in SPLITS:
        counts = params.counts.get(split)
        if counts is None:
            continue
        tag_cursor = 0
        for level, n in enumerate(counts):
            center = params.gap_positions[level] * direction
            noise = rng.normal(size=(int(n), params.dim)) * params.noise_sigma
            for i in range(int(n)):
                group = None
                if params.group_tags:
                    group = params.group_tags[tag_cursor % len(params.group_tags)]
                    tag_cursor += 1
                records.append(
                    EmbeddingRecord(
                        id=f"syn-{split}-L{level}-{i:04d}",
                        label=level,
                        split=split,
                        group=group,
                        vec=center + noise[i],
                    )
                )
    meta = {"generator": "synthetic-gaussian-line", "seed": params.seed}
    return Dataset(schema=schema, dim=params.dim, records=tuple(records), meta=meta)


def default_level_names(num_levels: int) -> tuple[str, ...]:
    """CEFR-style names for the five-level case, generic L0..Ln otherwise."""
    if num_levels == 5:
        return ("A2", "B1_1", "B1_2", "B2", "native")
    return tuple(f"L{j}" for j in range(num_levels))
