"""Acceptance gate for the exporter: interoperability with the grading toolkit.

The exporter talks to the grading toolkit only through .embl files, so the
one acceptance criterion here is the round trip: exported files must load in
that package unchanged, and its mean pooling of exported frames must equal
the exporter's own pooled vectors within float32 epsilon.
"""

import numpy as np
import pytest

from embexport import export_speech, export_text
from tests.conftest import write_manifest

protograde = pytest.importorskip(
    "protograde", reason="round-trip check needs the grading toolkit installed")

LEVELS = ("A2", "B1_1", "B1_2", "B2", "native")


@pytest.fixture()
def verdict(request):
    """Print one `[acceptance N] PASS/FAIL` line past capture, then assert."""
    capman = request.config.pluginmanager.getplugin("capturemanager")

    def _report(criterion: int, ok: bool, detail: str) -> None:
        line = f"[acceptance {criterion}] {'PASS' if ok else 'FAIL'} — {detail}"
        if capman is not None:
            with capman.global_and_fixture_disabled():
                print(f"\n{line}", flush=True)
        else:
            print(line, flush=True)
        assert ok, line

    return _report


def test_criterion_10_round_trip_and_pooling_agreement(
        verdict, tmp_path, text_encoder_dir, speech_encoder_dir, wav_dir):
    text_manifest = write_manifest(tmp_path / "text.csv", [
        ("t1", "the cat sat on a mat", "A2", "TWN", "train"),
        ("t2", "a dog ran fast today", "B1_2", "HKG", "valid"),
        ("t3", "the dog spoke well", "native", "", "test"),
    ])
    speech_manifest = write_manifest(tmp_path / "speech.csv", [
        ("s1", wav_dir / "silence_16k.wav", "B1_1", "TWN", "train"),
        ("s2", wav_dir / "tone_stereo_22050.wav", "B2", "JPN", "test"),
    ])

    outputs = {}
    export_text(text_manifest, text_encoder_dir, tmp_path / "text.embl",
                level_names=LEVELS)
    export_text(text_manifest, text_encoder_dir, tmp_path / "text_frames.embl",
                level_names=LEVELS, include_frames=True)
    export_speech(speech_manifest, speech_encoder_dir, tmp_path / "speech.embl",
                  level_names=LEVELS)
    export_speech(speech_manifest, speech_encoder_dir,
                  tmp_path / "speech_frames.embl", level_names=LEVELS,
                  include_frames=True)
    for name in ("text", "text_frames", "speech", "speech_frames"):
        outputs[name] = protograde.load_dataset(tmp_path / f"{name}.embl")

    loaded_ok = all(ds.schema.names == LEVELS for ds in outputs.values())
    loaded_ok = loaded_ok and outputs["text"].dim == 8
    loaded_ok = loaded_ok and len(outputs["text"].records) == 3
    loaded_ok = loaded_ok and len(outputs["speech"].records) == 2
    loaded_ok = loaded_ok and outputs["text"].records[2].group is None
    loaded_ok = loaded_ok and all(r.frames is not None
                                  for r in outputs["text_frames"].records)

    eps = float(np.finfo(np.float32).eps)
    worst = 0.0
    for mode in ("text", "speech"):
        pooled = outputs[mode]
        framed = outputs[f"{mode}_frames"]
        for vec_record, frame_record in zip(pooled.records, framed.records):
            theirs = protograde.mean_pool(frame_record.frames)
            scale = np.maximum(np.abs(theirs), 1.0)
            worst = max(worst, float(
                (np.abs(vec_record.vec - theirs) / scale).max()))
    pooling_ok = worst <= eps

    verdict(10, loaded_ok and pooling_ok,
            f"4 exported .embl files load in the grading toolkit; its "
            f"mean_pool of exported frames matches pooled vectors within "
            f"float32 eps (worst rel diff {worst:.2e})")
