"""Session fixtures: tiny locally-built encoders and small WAV files.

The encoders are randomly initialized miniatures saved to disk and reloaded
through the same auto-class path as published checkpoints, so the export
pipeline is exercised end to end without any network access.
"""

import numpy as np
import pytest
import torch
from scipy.io import wavfile
from transformers.utils import logging as hf_logging

hf_logging.set_verbosity_error()
hf_logging.disable_progress_bar()


@pytest.fixture(scope="session")
def text_encoder_dir(tmp_path_factory):
    from transformers import BertConfig, BertModel, BertTokenizer

    target = tmp_path_factory.mktemp("tinybert")
    vocab = ["[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]",
             "the", "cat", "sat", "on", "mat", "a", "dog", "ran", "fast",
             "spoke", "well", "today", "!", ".", ","]
    vocab_file = target / "vocab.txt"
    vocab_file.write_text("\n".join(vocab) + "\n", encoding="utf-8")
    tokenizer = BertTokenizer(str(vocab_file), do_lower_case=True,
                              model_max_length=16)
    tokenizer.save_pretrained(target)
    torch.manual_seed(0)
    config = BertConfig(vocab_size=len(vocab), hidden_size=8,
                        num_hidden_layers=1, num_attention_heads=2,
                        intermediate_size=16, max_position_embeddings=32)
    BertModel(config).save_pretrained(target)
    return str(target)


@pytest.fixture(scope="session")
def speech_encoder_dir(tmp_path_factory):
    from transformers import Wav2Vec2Config, Wav2Vec2FeatureExtractor, Wav2Vec2Model

    target = tmp_path_factory.mktemp("tinyw2v")
    torch.manual_seed(0)
    config = Wav2Vec2Config(
        vocab_size=16, hidden_size=8, num_hidden_layers=1,
        num_attention_heads=2, intermediate_size=16,
        conv_dim=(4, 4), conv_kernel=(10, 3), conv_stride=(5, 2),
        num_feat_extract_layers=2, num_conv_pos_embeddings=16,
        num_conv_pos_embedding_groups=2)
    Wav2Vec2Model(config).save_pretrained(target)
    Wav2Vec2FeatureExtractor(feature_size=1, sampling_rate=16000,
                             padding_value=0.0, do_normalize=True,
                             return_attention_mask=False).save_pretrained(target)
    return str(target)


@pytest.fixture(scope="session")
def wav_dir(tmp_path_factory):
    target = tmp_path_factory.mktemp("wavs")
    wavfile.write(target / "silence_16k.wav", 16000,
                  np.zeros(16000, dtype=np.int16))
    t = np.arange(11025) / 22050.0
    tone = (0.3 * np.sin(2 * np.pi * 440 * t)).astype(np.float32)
    stereo = np.stack([tone, 0.5 * tone], axis=1)
    wavfile.write(target / "tone_stereo_22050.wav", 22050, stereo)
    t8 = np.arange(4000) / 8000.0
    wavfile.write(target / "tone_8k.wav", 8000,
                  (8000 * np.sin(2 * np.pi * 200 * t8)).astype(np.int16))
    (target / "corrupt.wav").write_bytes(b"not really audio data")
    return target


def write_manifest(path, rows):
    lines = ["id,media,label,group,split"]
    lines += [",".join("" if cell is None else str(cell) for cell in row)
              for row in rows]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path
