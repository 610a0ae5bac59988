"""Thin wrappers around pretrained encoders: load once, embed one item."""

from __future__ import annotations

import numpy as np
import torch

from .errors import DataError


def load_text_encoder(encoder_id, device: str = "cpu"):
    """Load a tokenizer/model pair; returns (tokenizer, model)."""
    from transformers import AutoModel, AutoTokenizer

    try:
        tokenizer = AutoTokenizer.from_pretrained(encoder_id)
        model = AutoModel.from_pretrained(encoder_id)
    except Exception as exc:
        raise DataError(f"cannot load text encoder '{encoder_id}': {exc}") from None
    model.to(device)
    model.eval()
    return tokenizer, model


def load_speech_encoder(encoder_id, device: str = "cpu"):
    """Load a feature-extractor/model pair; returns (extractor, model)."""
    from transformers import AutoFeatureExtractor, AutoModel

    try:
        extractor = AutoFeatureExtractor.from_pretrained(encoder_id)
        model = AutoModel.from_pretrained(encoder_id)
    except Exception as exc:
        raise DataError(f"cannot load speech encoder '{encoder_id}': {exc}") from None
    model.to(device)
    model.eval()
    return extractor, model


def embed_text(tokenizer, model, text: str, device: str = "cpu") -> np.ndarray:
    """Final-layer token representations for one transcript, shape (T, dim)."""
    encoded = tokenizer(text, return_tensors="pt", truncation=True)
    encoded = {key: value.to(device) for key, value in encoded.items()}
    with torch.no_grad():
        output = model(**encoded)
    frames = output.last_hidden_state[0].cpu().numpy().astype(np.float32)
    if frames.shape[0] == 0:
        raise DataError("encoder produced no token representations")
    return frames


def embed_speech(extractor, model, signal: np.ndarray,
                 device: str = "cpu") -> np.ndarray:
    """Final-layer frame representations for one clip, shape (T, dim)."""
    inputs = extractor(signal, sampling_rate=extractor.sampling_rate,
                       return_tensors="pt")
    inputs = {key: value.to(device) for key, value in inputs.items()}
    try:
        with torch.no_grad():
            output = model(**inputs)
    except RuntimeError as exc:
        raise DataError(f"encoder failed on clip ({exc})") from None
    frames = output.last_hidden_state[0].cpu().numpy().astype(np.float32)
    if frames.shape[0] == 0:
        raise DataError("clip too short: encoder produced no frames")
    return frames


def encoder_width(model) -> int:
    """Embedding dimension of the model's final layer."""
    for attr in ("hidden_size", "d_model"):
        width = getattr(model.config, attr, None)
        if width is not None:
            return int(width)
    raise DataError("cannot determine encoder output width from its config")
