"""embexport: run pretrained encoders over manifests, write .embl embeddings."""

from .audio import load_audio_mono
from .emblwriter import HEADER_SCHEMA, write_embl
from .errors import DataError, ExportError, UsageError
from .export import DEFAULT_LEVEL_NAMES, export_speech, export_text
from .manifest import MANIFEST_COLUMNS, SPLITS, ManifestRow, read_manifest

__all__ = [
    "DEFAULT_LEVEL_NAMES",
    "DataError",
    "ExportError",
    "HEADER_SCHEMA",
    "MANIFEST_COLUMNS",
    "ManifestRow",
    "SPLITS",
    "UsageError",
    "export_speech",
    "export_text",
    "load_audio_mono",
    "read_manifest",
    "write_embl",
]

__version__ = "0.1.0"
