"""Error hierarchy shared by the exporter library and its CLI."""


class ExportError(Exception):
    """Base class for all exporter failures."""


class UsageError(ExportError):
    """Bad command line: unknown flags, missing arguments (exit code 1)."""


class DataError(ExportError):
    """Invalid manifest, media, or encoder inputs (exit code 2)."""
