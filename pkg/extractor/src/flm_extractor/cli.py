"""flm-extract: audio (+ optional seconds-based alignments) -> corpus dir."""

from __future__ import annotations

import argparse
import sys

from .alignments import AlignmentError
from .audio import AudioError
from .extract import ExtractionJob, extract_logits
from .model import DEFAULT_MODEL, ModelError


def _parse_label_map(path):
    mapping = {}
    with open(path, "r", encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            stripped = line.strip()
            if not stripped or stripped.startswith("#"):
                continue
            fields = stripped.split("\t")
            if len(fields) != 2:
                raise AlignmentError(
                    f"{path}: line {lineno}: expected 'from<TAB>to'"
                )
            mapping[fields[0]] = fields[1]
    return mapping


def build_parser():
    parser = argparse.ArgumentParser(
        prog="flm-extract",
        description="Dump frame-level phone logits plus inventory and "
        "frame alignments in the scoring engine's formats.",
    )
    parser.add_argument("audio", nargs="+", help="audio files (wav)")
    parser.add_argument("--out", required=True, help="output directory")
    parser.add_argument("--model", default=DEFAULT_MODEL)
    parser.add_argument("--ctm", help="seconds-based CTM alignment file")
    parser.add_argument(
        "--textgrid",
        action="append",
        default=[],
        help="repeatable; TextGrid per utterance (stem = utterance id)",
    )
    parser.add_argument("--tier", default="phones")
    parser.add_argument("--label-map", help="TSV remapping source labels")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        label_map = _parse_label_map(args.label_map) if args.label_map else {}
        job = ExtractionJob(
            audio_paths=tuple(args.audio),
            out_dir=args.out,
            model=args.model,
            ctm_path=args.ctm,
            textgrid_paths=tuple(args.textgrid),
            textgrid_tier=args.tier,
            label_map=label_map,
        )
        result = extract_logits(job)
    except (ModelError, AlignmentError, AudioError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    for path, reason in result.failures:
        print(f"warning: skipped {path}: {reason}", file=sys.stderr)
    print(
        f"extracted {len(result.utterances)} utterances at "
        f"{result.frame_rate:g} frames/s -> {result.manifest_path}"
    )
    return 0


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
