"""Bundled desk-scale presets: synthetic data and training configs.

The synthetic counts reproduce the skew of a real five-level corpus at one
quarter of its size so a full train/eval cycle stays under two minutes on a
laptop CPU.  The preset learning rate is higher than the library default
because there is no pretrained encoder to protect.
"""

from __future__ import annotations

from .dataset import SynthParams
from .trainer import TrainConfig

# Per-split per-level counts: a heavily imbalanced five-level distribution
# (quarter-scale), with level 0 the rarest minority class.
SYNTH_TRAIN_COUNTS = (75, 198, 420, 146, 135)
SYNTH_VALID_COUNTS = (4, 11, 24, 8, 8)
SYNTH_TEST_COUNTS = (4, 11, 23, 8, 8)

SYNTH_DIM = 16
# Strictly increasing but non-uniform level positions along the generator's
# random direction: adjacent levels are separated by unequal gaps.
SYNTH_GAP_POSITIONS = (0.0, 1.0, 1.6, 2.6, 4.0)
SYNTH_NOISE_SIGMA = 0.9
SYNTH_GROUP_TAGS = ("g1", "g2", "g3", "g4")


def synth_preset(seed: int = 42) -> SynthParams:
    """The bundled synthetic benchmark parameters."""
    return SynthParams(
        dim=SYNTH_DIM,
        counts={
            "train": SYNTH_TRAIN_COUNTS,
            "valid": SYNTH_VALID_COUNTS,
            "test": SYNTH_TEST_COUNTS,
        },
        gap_positions=SYNTH_GAP_POSITIONS,
        noise_sigma=SYNTH_NOISE_SIGMA,
        seed=seed,
        group_tags=SYNTH_GROUP_TAGS,
    )


def synth_train_config(head: str = "proto_sed", weighting: str = "none",
                       seed: int = 42, **overrides) -> TrainConfig:
    """Desk-scale training config for the synthetic benchmark."""
    settings = dict(
        head=head,
        projection="linear",
        aggregation="mean_sim",
        proto_init="class_kmeans",
        num_prototypes=3,
        weighting=weighting,
        alpha=0.5,
        learning_rate=1e-3,
        batch_size=8,
        max_epochs=40,
        patience=10,
        seed=seed,
    )
    settings.update(overrides)
    return TrainConfig(**settings)
