"""Tests for the embedding file format, pooling, statistics, and generator."""

import json

import numpy as np
import numpy.testing as npt
import pytest

from protograde import (
    DataError,
    Dataset,
    EmbeddingRecord,
    LevelSchema,
    SynthParams,
    class_frequencies,
    default_level_names,
    gen_synthetic,
    load_dataset,
    mean_pool,
    save_dataset,
    split_matrix,
)
from protograde.presets import synth_preset

CORPUS_COUNTS = (299, 792, 1681, 586, 540)


def write_embl(path, lines):
    path.write_text("\n".join(json.dumps(obj) for obj in lines) + "\n", encoding="utf-8")
    return path


def two_level_header(dim=2):
    return {"schema": "emb-v1", "dim": dim, "levels": ["A", "B"]}


class TestLevelSchema:
    def test_positions_define_ordinals(self):
        schema = LevelSchema(("A2", "B1_1", "B1_2", "B2", "native"))
        assert schema.num_levels == 5
        assert schema.index("B1_2") == 2

    def test_rejects_duplicates_and_empties(self):
        with pytest.raises(DataError):
            LevelSchema(("A", "A"))
        with pytest.raises(DataError):
            LevelSchema(("A", ""))
        with pytest.raises(DataError):
            LevelSchema(("only",))

    def test_unknown_name(self):
        with pytest.raises(DataError):
            LevelSchema(("A", "B")).index("C")


class TestMeanPool:
    def test_single_row(self):
        npt.assert_array_equal(mean_pool([[5.0, -1.0]]), [5.0, -1.0])

    def test_column_means(self):
        npt.assert_allclose(mean_pool([[1.0, 3.0], [3.0, 5.0]]), [2.0, 4.0])

    def test_identical_rows(self):
        row = np.array([0.25, -3.5, 7.0])
        stacked = np.tile(row, (6, 1))
        npt.assert_allclose(mean_pool(stacked), row, rtol=0, atol=1e-15)

    def test_rejects_empty_and_non_matrix(self):
        with pytest.raises(DataError):
            mean_pool(np.empty((0, 3)))
        with pytest.raises(DataError):
            mean_pool([1.0, 2.0])

    def test_linearity(self):
        rng = np.random.default_rng(11)
        for _ in range(25):
            frames = rng.normal(size=(rng.integers(1, 9), rng.integers(1, 6)))
            alpha = rng.normal()
            npt.assert_allclose(mean_pool(alpha * frames), alpha * mean_pool(frames),
                                rtol=1e-12, atol=1e-12)


class TestLoadDataset:
    def test_minimal_file(self, tmp_path):
        path = write_embl(tmp_path / "a.embl", [
            two_level_header(),
            {"id": "r1", "group": None, "split": "train", "label": 0, "vec": [1.0, 2.0]},
        ])
        ds = load_dataset(path)
        assert len(ds) == 1 and ds.dim == 2
        assert ds.schema.names == ("A", "B")
        npt.assert_array_equal(ds.records[0].vec, [1.0, 2.0])

    def test_header_only_is_empty_dataset(self, tmp_path):
        ds = load_dataset(write_embl(tmp_path / "a.embl", [two_level_header()]))
        assert len(ds) == 0

    def test_missing_header(self, tmp_path):
        path = tmp_path / "a.embl"
        path.write_text("", encoding="utf-8")
        with pytest.raises(DataError, match="header"):
            load_dataset(path)

    def test_bad_header_schema(self, tmp_path):
        path = write_embl(tmp_path / "a.embl", [{"schema": "other", "dim": 2, "levels": ["A", "B"]}])
        with pytest.raises(DataError, match="schema"):
            load_dataset(path)

    def test_dimension_mismatch_names_record_and_line(self, tmp_path):
        path = write_embl(tmp_path / "a.embl", [
            two_level_header(),
            {"id": "bad-one", "split": "train", "label": 0, "vec": [1.0, 2.0, 3.0]},
        ])
        with pytest.raises(DataError, match=r"line 2.*'bad-one'.*expected dim 2"):
            load_dataset(path)

    def test_label_out_of_range(self, tmp_path):
        path = write_embl(tmp_path / "a.embl", [
            two_level_header(),
            {"id": "r", "split": "train", "label": 2, "vec": [1.0, 2.0]},
        ])
        with pytest.raises(DataError, match="label"):
            load_dataset(path)

    def test_unknown_split(self, tmp_path):
        path = write_embl(tmp_path / "a.embl", [
            two_level_header(),
            {"id": "r", "split": "dev", "label": 0, "vec": [1.0, 2.0]},
        ])
        with pytest.raises(DataError, match="split"):
            load_dataset(path)

    def test_exactly_one_payload(self, tmp_path):
        both = {"id": "r", "split": "train", "label": 0, "vec": [1.0, 2.0],
                "frames": [[1.0, 2.0]]}
        with pytest.raises(DataError, match="exactly one"):
            load_dataset(write_embl(tmp_path / "a.embl", [two_level_header(), both]))
        neither = {"id": "r", "split": "train", "label": 0}
        with pytest.raises(DataError, match="exactly one"):
            load_dataset(write_embl(tmp_path / "b.embl", [two_level_header(), neither]))

    def test_non_finite_rejected(self, tmp_path):
        path = tmp_path / "a.embl"
        path.write_text(json.dumps(two_level_header()) + "\n"
                        + '{"id":"r","split":"train","label":0,"vec":[1.0,NaN]}\n',
                        encoding="utf-8")
        with pytest.raises(DataError):
            load_dataset(path)

    def test_frames_payload_retained(self, tmp_path):
        path = write_embl(tmp_path / "a.embl", [
            two_level_header(),
            {"id": "r", "split": "train", "label": 0, "frames": [[1.0, 2.0], [3.0, 4.0]]},
        ])
        rec = load_dataset(path).records[0]
        assert rec.vec is None
        npt.assert_array_equal(rec.frames, [[1.0, 2.0], [3.0, 4.0]])

    def test_extra_header_keys_preserved(self, tmp_path):
        header = dict(two_level_header(), seed=9, generator="custom")
        path = write_embl(tmp_path / "a.embl", [
            header,
            {"id": "r", "split": "train", "label": 0, "vec": [0.5, 0.5]},
        ])
        ds = load_dataset(path)
        assert ds.meta == {"seed": 9, "generator": "custom"}


class TestRoundTrip:
    def test_save_then_load_reproduces_everything(self, tmp_path):
        ds = gen_synthetic(synth_preset(3))
        out = tmp_path / "round.embl"
        save_dataset(ds, out)
        back = load_dataset(out)
        assert back.schema.names == ds.schema.names
        assert back.meta == ds.meta
        assert len(back) == len(ds)
        for a, b in zip(ds.records, back.records):
            assert (a.id, a.label, a.split, a.group) == (b.id, b.label, b.split, b.group)
            npt.assert_array_equal(a.vec, b.vec)

    def test_frames_round_trip(self, tmp_path):
        rec = EmbeddingRecord(id="f1", label=1, split="valid", group="g",
                              frames=np.array([[0.1, 0.2], [0.3, 0.4], [0.5, 0.6]]))
        ds = Dataset(schema=LevelSchema(("A", "B")), dim=2, records=(rec,))
        out = tmp_path / "frames.embl"
        save_dataset(ds, out)
        back = load_dataset(out)
        npt.assert_array_equal(back.records[0].frames, rec.frames)

    def test_save_load_save_is_byte_stable(self, tmp_path):
        ds = gen_synthetic(synth_preset(5))
        first = tmp_path / "one.embl"
        second = tmp_path / "two.embl"
        save_dataset(ds, first)
        save_dataset(load_dataset(first), second)
        assert first.read_bytes() == second.read_bytes()


class TestClassFrequencies:
    def test_corpus_counts_and_frequencies(self):
        params = SynthParams(dim=2, counts={"train": CORPUS_COUNTS, "valid": (1, 1, 1, 1, 1),
                                            "test": (1, 1, 1, 1, 1)},
                             gap_positions=(0.0, 1.0, 1.6, 2.6, 4.0), noise_sigma=0.9, seed=0)
        counts, freqs = class_frequencies(gen_synthetic(params), "train")
        npt.assert_array_equal(counts, CORPUS_COUNTS)
        assert counts.sum() == 3898
        npt.assert_allclose(freqs, (0.07671, 0.20318, 0.43125, 0.15033, 0.13853), atol=1e-5)
        assert abs(freqs.sum() - 1.0) <= 1e-12

    def test_single_level_split(self):
        recs = tuple(EmbeddingRecord(id=f"r{i}", label=0, split="train", vec=np.zeros(2))
                     for i in range(2))
        ds = Dataset(schema=LevelSchema(("A", "B")), dim=2, records=recs)
        counts, freqs = class_frequencies(ds, "train")
        npt.assert_array_equal(counts, (2, 0))
        npt.assert_array_equal(freqs, (1.0, 0.0))

    def test_empty_split_is_error(self):
        ds = Dataset(schema=LevelSchema(("A", "B")), dim=2, records=())
        with pytest.raises(DataError):
            class_frequencies(ds, "test")

    def test_permutation_invariance(self):
        rng = np.random.default_rng(4)
        for _ in range(10):
            labels = rng.integers(0, 3, size=30)
            recs = [EmbeddingRecord(id=f"r{i}", label=int(l), split="train", vec=np.zeros(2))
                    for i, l in enumerate(labels)]
            ds1 = Dataset(schema=LevelSchema(("A", "B", "C")), dim=2, records=tuple(recs))
            rng.shuffle(recs)
            ds2 = Dataset(schema=LevelSchema(("A", "B", "C")), dim=2, records=tuple(recs))
            npt.assert_array_equal(class_frequencies(ds1, "train")[0],
                                   class_frequencies(ds2, "train")[0])


class TestGenSynthetic:
    def test_counts_enforced_exactly(self):
        params = SynthParams(dim=3, counts={"train": (30, 79, 168, 59, 54)},
                             gap_positions=(0.0, 1.0, 1.6, 2.6, 4.0), noise_sigma=0.9, seed=2)
        counts, _ = class_frequencies(gen_synthetic(params), "train")
        npt.assert_array_equal(counts, (30, 79, 168, 59, 54))

    def test_deterministic_bytes(self, tmp_path):
        for i, name in enumerate(("a.embl", "b.embl")):
            save_dataset(gen_synthetic(synth_preset(9)), tmp_path / name)
        assert (tmp_path / "a.embl").read_bytes() == (tmp_path / "b.embl").read_bytes()

    def test_near_zero_noise_collapses_to_centers(self):
        params = SynthParams(dim=6, counts={"train": (4, 4)}, gap_positions=(0.0, 2.0),
                             noise_sigma=1e-12, seed=8)
        ds = gen_synthetic(params)
        rng = np.random.default_rng(8)
        direction = rng.normal(size=6)
        direction /= np.linalg.norm(direction)
        for rec in ds.records:
            center = params.gap_positions[rec.label] * direction
            npt.assert_allclose(rec.vec, center, atol=1e-9)

    def test_vector_dimension_and_splits(self):
        ds = gen_synthetic(synth_preset(1))
        assert ds.dim == 16
        for rec in ds.records:
            assert rec.vec.shape == (16,)
        X, y, groups, ids = split_matrix(ds, "valid")
        assert X.shape == (55, 16) and len(ids) == 55
        assert set(groups) <= {"g1", "g2", "g3", "g4"}

    def test_param_validation(self):
        good = dict(dim=2, counts={"train": (1, 1)}, gap_positions=(0.0, 1.0),
                    noise_sigma=1.0, seed=0)
        with pytest.raises(DataError):
            SynthParams(**dict(good, gap_positions=(1.0, 1.0)))
        with pytest.raises(DataError):
            SynthParams(**dict(good, noise_sigma=0.0))
        with pytest.raises(DataError):
            SynthParams(**dict(good, counts={"train": (1, -1)}))
        with pytest.raises(DataError):
            SynthParams(**dict(good, counts={"dev": (1, 1)}))
        with pytest.raises(DataError):
            SynthParams(**dict(good, counts={"train": (1, 1, 1)}))


def test_default_level_names():
    assert default_level_names(5) == ("A2", "B1_1", "B1_2", "B2", "native")
    assert default_level_names(3) == ("L0", "L1", "L2")
