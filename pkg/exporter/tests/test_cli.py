"""End-to-end tests for the embexport command line."""

import json

from embexport.cli import run
from tests.conftest import write_manifest


def text_manifest(tmp_path):
    return write_manifest(tmp_path / "m.csv", [
        ("r1", "the cat sat on a mat", "A2", "TWN", "train"),
        ("r2", "a dog ran fast", "B2", "HKG", "test"),
    ])


class TestCli:
    def test_export_text_end_to_end(self, tmp_path, text_encoder_dir, capsys):
        out = tmp_path / "text.embl"
        code = run(["export-text", "--manifest", str(text_manifest(tmp_path)),
                    "--encoder", text_encoder_dir, "--out", str(out)])
        assert code == 0
        assert "2 records" in capsys.readouterr().out
        header = json.loads(out.read_text(encoding="utf-8").splitlines()[0])
        assert header["levels"] == ["A2", "B1_1", "B1_2", "B2", "native"]

    def test_export_speech_end_to_end(self, tmp_path, wav_dir,
                                      speech_encoder_dir):
        manifest = write_manifest(tmp_path / "m.csv", [
            ("s1", wav_dir / "silence_16k.wav", "B1_1", "g", "train"),
        ])
        out = tmp_path / "speech.embl"
        assert run(["export-speech", "--manifest", str(manifest),
                    "--encoder", speech_encoder_dir, "--out", str(out)]) == 0
        assert out.is_file()

    def test_frames_flag(self, tmp_path, text_encoder_dir, capsys):
        out = tmp_path / "frames.embl"
        assert run(["export-text", "--manifest", str(text_manifest(tmp_path)),
                    "--encoder", text_encoder_dir, "--out", str(out),
                    "--frames"]) == 0
        record = json.loads(out.read_text(encoding="utf-8").splitlines()[1])
        assert "frames" in record and "vec" not in record

    def test_levels_flag_overrides_defaults(self, tmp_path, text_encoder_dir):
        manifest = write_manifest(tmp_path / "m.csv", [
            ("r1", "the cat", "low", "g", "train"),
        ])
        out = tmp_path / "custom.embl"
        assert run(["export-text", "--manifest", str(manifest),
                    "--encoder", text_encoder_dir, "--out", str(out),
                    "--levels", "low,high"]) == 0
        header = json.loads(out.read_text(encoding="utf-8").splitlines()[0])
        assert header["levels"] == ["low", "high"]

    def test_no_subcommand_is_usage_error(self, capsys):
        assert run([]) == 1
        assert capsys.readouterr().err.startswith("error:")

    def test_unknown_flag_is_usage_error(self, tmp_path, capsys):
        assert run(["export-text", "--manifest", "m.csv", "--encoder", "e",
                    "--out", "o.embl", "--bogus"]) == 1

    def test_duplicate_levels_is_usage_error(self, tmp_path, text_encoder_dir, capsys):
        assert run(["export-text", "--manifest", str(text_manifest(tmp_path)),
                    "--encoder", text_encoder_dir, "--out", "o.embl",
                    "--levels", "A2,A2"]) == 1

    def test_bad_manifest_is_exit_2(self, tmp_path, text_encoder_dir, capsys):
        manifest = write_manifest(tmp_path / "m.csv", [
            ("r1", "words", "NOPE", "g", "train"),
        ])
        out = tmp_path / "never.embl"
        code = run(["export-text", "--manifest", str(manifest),
                    "--encoder", text_encoder_dir, "--out", str(out)])
        assert code == 2
        err = capsys.readouterr().err
        assert "NOPE" in err and err.count("\n") == 1
        assert not out.exists()

    def test_missing_manifest_file_is_exit_2(self, tmp_path, capsys):
        assert run(["export-text", "--manifest", str(tmp_path / "none.csv"),
                    "--encoder", "whatever", "--out", "o.embl"]) == 2
