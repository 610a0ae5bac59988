"""Command line interface: embed manifest rows with a pretrained encoder."""

from __future__ import annotations

import argparse
import sys

from .errors import DataError, ExportError, UsageError
from .export import DEFAULT_LEVEL_NAMES, export_speech, export_text


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _add_common(parser):
    parser.add_argument("--manifest", required=True,
                        help="CSV with header id,media,label,group,split")
    parser.add_argument("--encoder", required=True,
                        help="encoder model id or local directory")
    parser.add_argument("--out", required=True, help="output .embl path")
    parser.add_argument("--levels", default=",".join(DEFAULT_LEVEL_NAMES),
                        help="comma-separated ordered level names")
    parser.add_argument("--frames", action="store_true",
                        help="store per-token/frame matrices instead of pooled vectors")
    parser.add_argument("--device", default="cpu", help="torch device")


def build_parser() -> _Parser:
    parser = _Parser(prog="embexport",
                     description="Export mean-pooled encoder embeddings "
                                 "to .embl files.")
    sub = parser.add_subparsers(dest="command")
    _add_common(sub.add_parser("export-text",
                               help="embed transcripts from the media column"))
    _add_common(sub.add_parser("export-speech",
                               help="embed WAV files named by the media column"))
    return parser


def _levels(arg: str):
    names = tuple(name.strip() for name in arg.split(",") if name.strip())
    if len(names) < 2:
        raise UsageError("--levels needs at least two comma-separated names")
    if len(set(names)) != len(names):
        raise UsageError("--levels names must be unique")
    return names


def run(argv) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            raise UsageError("a subcommand is required (see --help)")
        exporter = export_text if args.command == "export-text" else export_speech
        count = exporter(args.manifest, args.encoder, args.out,
                         level_names=_levels(args.levels),
                         include_frames=args.frames, device=args.device)
        print(f"wrote {args.out} ({count} records)")
        return 0
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except DataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"error: file not found: {exc.filename}", file=sys.stderr)
        return 2
    except ExportError as exc:  # pragma: no cover - safety net
        print(f"error: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
