"""Manifest parsing: the CSV that names what to embed and how to label it."""

from __future__ import annotations

import csv
from dataclasses import dataclass

from .errors import DataError

MANIFEST_COLUMNS = ("id", "media", "label", "group", "split")
SPLITS = ("train", "valid", "test")


@dataclass(frozen=True)
class ManifestRow:
    """One item to export.

    ``media`` is a transcript string in text mode and an audio file path in
    speech mode; ``label`` is resolved to a level index against the level
    names chosen at export time.
    """

    id: str
    media: str
    label: str
    group: str | None
    split: str


def read_manifest(path, level_names) -> list[ManifestRow]:
    """Read and validate a manifest CSV; errors cite the offending row."""
    names = tuple(level_names)
    rows: list[ManifestRow] = []
    seen_ids: set[str] = set()
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"{path}: empty manifest (missing header row)") from None
        if tuple(header) != MANIFEST_COLUMNS:
            raise DataError(
                f"{path}: header must be {','.join(MANIFEST_COLUMNS)}, "
                f"got {','.join(header)}")
        for number, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(MANIFEST_COLUMNS):
                raise DataError(
                    f"{path}: row {number}: expected {len(MANIFEST_COLUMNS)} "
                    f"columns, got {len(row)}")
            rid, media, label, group, split = (cell.strip() for cell in row)
            if not rid:
                raise DataError(f"{path}: row {number}: empty id")
            if rid in seen_ids:
                raise DataError(f"{path}: row {number}: duplicate id '{rid}'")
            seen_ids.add(rid)
            if label not in names:
                raise DataError(
                    f"{path}: row {number}: unknown label '{label}' "
                    f"(levels: {', '.join(names)})")
            if split not in SPLITS:
                raise DataError(
                    f"{path}: row {number}: unknown split '{split}' "
                    f"(expected one of {', '.join(SPLITS)})")
            rows.append(ManifestRow(id=rid, media=media, label=label,
                                    group=group or None, split=split))
    if not rows:
        raise DataError(f"{path}: manifest has no data rows")
    return rows
