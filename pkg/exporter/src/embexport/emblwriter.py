"""Writer for the line-delimited embedding interchange format (.embl).

Layout: one JSON header line tagged ``"schema": "emb-v1"`` carrying the
embedding dimension and ordered level names, then one JSON record per line
with exactly one numeric payload — a pooled ``vec`` or a 2-D ``frames``
matrix. UTF-8, LF line endings; floats are serialized with full ``repr``
precision so values round-trip exactly.
"""

from __future__ import annotations

import json

import numpy as np

from .errors import DataError

HEADER_SCHEMA = "emb-v1"


def write_embl(path, dim, level_names, records, meta=None) -> None:
    """Write records to ``path``.

    ``records`` is an iterable of dicts with keys id, label (level index),
    group, split, and exactly one of vec (1-D) / frames (2-D); trailing axis
    length must equal ``dim``.
    """
    header = {"schema": HEADER_SCHEMA, "dim": int(dim),
              "levels": list(level_names)}
    for key in sorted(meta or {}):
        if key in header:
            raise DataError(f"meta key '{key}' collides with a header field")
        header[key] = meta[key]
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(json.dumps(header) + "\n")
        for record in records:
            obj = {"id": record["id"], "group": record["group"],
                   "split": record["split"], "label": int(record["label"])}
            has_vec = "vec" in record
            has_frames = "frames" in record
            if has_vec == has_frames:
                raise DataError(
                    f"record '{obj['id']}': need exactly one of vec/frames")
            if has_vec:
                vec = np.asarray(record["vec"], dtype=np.float64)
                if vec.shape != (dim,):
                    raise DataError(
                        f"record '{obj['id']}': vec has shape {vec.shape}, "
                        f"expected ({dim},)")
                obj["vec"] = vec.tolist()
            else:
                frames = np.asarray(record["frames"], dtype=np.float64)
                if frames.ndim != 2 or frames.shape[1] != dim:
                    raise DataError(
                        f"record '{obj['id']}': frames have shape "
                        f"{frames.shape}, expected (T, {dim})")
                obj["frames"] = frames.tolist()
            fh.write(json.dumps(obj) + "\n")
