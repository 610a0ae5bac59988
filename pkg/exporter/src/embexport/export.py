"""Export operations: run an encoder over manifest rows, pool, write .embl."""

from __future__ import annotations

import os

import numpy as np

from .audio import load_audio_mono
from .emblwriter import write_embl
from .encoders import (
    embed_speech,
    embed_text,
    encoder_width,
    load_speech_encoder,
    load_text_encoder,
)
from .errors import DataError
from .manifest import read_manifest

DEFAULT_LEVEL_NAMES = ("A2", "B1_1", "B1_2", "B2", "native")


def _record(row, label_index, frames, include_frames):
    record = {"id": row.id, "group": row.group, "split": row.split,
              "label": label_index}
    if include_frames:
        record["frames"] = frames
    else:
        # Mean in float64, then round once to float32: the stored vector is
        # within half a float32 ulp of any consumer's float64 mean of the
        # same frames, independent of clip length.
        record["vec"] = frames.astype(np.float64).mean(axis=0).astype(np.float32)
    return record


def export_text(manifest_path, encoder_id, out_path, *,
                level_names=DEFAULT_LEVEL_NAMES, include_frames=False,
                device="cpu") -> int:
    """Embed each manifest transcript; returns the number of records written.

    The ``media`` column holds the transcript text itself. Each record's
    vector is the mean over the final-layer token representations.
    """
    names = tuple(level_names)
    rows = read_manifest(manifest_path, names)
    for row in rows:
        if not row.media.strip():
            raise DataError(f"{manifest_path}: empty transcript for id '{row.id}'")
    tokenizer, model = load_text_encoder(encoder_id, device)
    dim = encoder_width(model)
    label_of = {name: j for j, name in enumerate(names)}
    records = []
    for row in rows:
        frames = embed_text(tokenizer, model, row.media, device)
        records.append(_record(row, label_of[row.label], frames, include_frames))
    write_embl(out_path, dim, names, records,
               meta={"encoder": str(encoder_id), "mode": "text",
                     "pooling": "mean"})
    return len(records)


def export_speech(manifest_path, encoder_id, out_path, *,
                  level_names=DEFAULT_LEVEL_NAMES, include_frames=False,
                  device="cpu") -> int:
    """Embed each manifest audio file; returns the number of records written.

    The ``media`` column holds a WAV path. Clips are converted to mono
    float32 at the encoder's sample rate; each record's vector is the mean
    over the final-layer frame representations.
    """
    names = tuple(level_names)
    rows = read_manifest(manifest_path, names)
    missing = [row.media for row in rows if not os.path.isfile(row.media)]
    if missing:
        raise DataError(f"{manifest_path}: missing media files: "
                        f"{', '.join(missing)}")
    extractor, model = load_speech_encoder(encoder_id, device)
    dim = encoder_width(model)
    label_of = {name: j for j, name in enumerate(names)}
    records = []
    for row in rows:
        signal = load_audio_mono(row.media, extractor.sampling_rate)
        frames = embed_speech(extractor, model, signal, device)
        records.append(_record(row, label_of[row.label], frames, include_frames))
    write_embl(out_path, dim, names, records,
               meta={"encoder": str(encoder_id), "mode": "speech",
                     "pooling": "mean"})
    return len(records)
