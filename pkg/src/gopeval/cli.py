"""Command-line harness.

Subcommands: priors, score, evaluate, phoneme-corr, calibrate, synth.
Exit codes: 0 success, 1 usage/configuration, 2 data validation, 3 I/O.
Identical inputs and flags produce byte-identical outputs regardless of
--jobs.
"""

from __future__ import annotations

import argparse
import os
import sys

from . import __version__
from .core import GopMethod, default_method_grid
from .errors import ConfigError, DataError, GopError, UsageError
from .formats import (
    UtteranceEntry,
    load_corpus,
    render_report,
    write_alignments,
    write_inventory,
    write_labels,
    write_logits,
    write_manifest,
    write_priors,
    _atomic_write_text,
    estimate_priors,
)
from .pipeline import (
    best_cell,
    build_report,
    calibrate_temperature,
    evaluate_grid,
    score_corpus,
)
from .synthetic import SyntheticConfig, generate_synthetic

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_IO = 3


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on bad usage; the harness contract says 1
    def error(self, message):
        raise UsageError(message)


def _parse_methods(specs, temperature):
    return tuple(GopMethod.parse(s, temperature) for s in specs)


def _parse_float_list(raw: str) -> tuple[float, ...]:
    try:
        return tuple(float(part) for part in raw.split(",") if part.strip())
    except ValueError:
        raise UsageError(f"expected comma-separated numbers, got {raw!r}") from None


def _parse_int_set(raw: str) -> frozenset[int]:
    try:
        return frozenset(int(part) for part in raw.split(",") if part.strip())
    except ValueError:
        raise UsageError(f"expected comma-separated integers, got {raw!r}") from None


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="gopeval",
        description="Pronunciation scoring and rank-correlation evaluation "
        "from frame-wise phone logits.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("priors", help="estimate smoothed phone priors")
    p.add_argument("--manifest", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--mode", choices=("frames", "segments"), default="frames")
    p.set_defaults(func=cmd_priors)

    p = sub.add_parser("score", help="per-segment and per-utterance scores")
    p.add_argument("--manifest", required=True)
    p.add_argument("--method", required=True, metavar="NORM:SCORE")
    p.add_argument("--temperature", type=float)
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("evaluate", help="run the method grid against labels")
    p.add_argument(
        "--method",
        action="append",
        metavar="NORM:SCORE",
        help="repeatable; default is the full 15-cell grid",
    )
    p.add_argument("--manifest", required=True)
    p.add_argument("--temperature", type=float)
    p.add_argument("--min-support", type=int, default=10)
    p.add_argument("--top-k", type=int, default=5)
    p.add_argument("--no-phonemes", action="store_true")
    p.add_argument("--algorithm", choices=("fast", "brute"), default="fast")
    p.add_argument("--out", required=True)
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("phoneme-corr", help="per-phoneme correlation report")
    p.add_argument("--manifest", required=True)
    p.add_argument("--method", required=True, metavar="NORM:SCORE")
    p.add_argument("--temperature", type=float)
    p.add_argument("--min-support", type=int, default=10)
    p.add_argument("--top-k", type=int, default=5)
    p.add_argument("--algorithm", choices=("fast", "brute"), default="fast")
    p.add_argument("--out", required=True)
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=cmd_phoneme_corr)

    p = sub.add_parser(
        "calibrate", help="grid-search a softmax temperature by NLL"
    )
    p.add_argument("--manifest", required=True)
    p.add_argument("--grid", default="0.25,0.5,1,2,4,8")
    p.add_argument("--out", help="optional TSV of (temperature, nll)")
    p.set_defaults(func=cmd_calibrate)

    p = sub.add_parser("synth", help="write a synthetic corpus")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--n-utterances", type=int, default=200)
    p.add_argument("--n-phones", type=int, default=8)
    p.add_argument("--frames-per-segment", type=int, default=5)
    p.add_argument("--segments-per-utterance", type=int, default=10)
    p.add_argument("--severity-levels", type=int, default=5)
    p.add_argument("--slope", type=float, default=2.0)
    p.add_argument("--noise", type=float, default=1.0)
    p.add_argument(
        "--degrading-phones",
        metavar="I,J,...",
        help="restrict severity degradation to these phone indices",
    )
    p.add_argument("--force", action="store_true")
    p.set_defaults(func=cmd_synth)
    return parser


def cmd_priors(args) -> int:
    corpus = load_corpus(args.manifest)
    prior = estimate_priors(corpus.alignments, corpus.inventory, mode=args.mode)
    write_priors(prior, corpus.inventory, args.out)
    print(f"wrote priors for {len(corpus.inventory)} phones to {args.out}")
    return EXIT_OK


def _score_tables(corpus, run):
    inv = corpus.inventory
    seg_lines = ["# utterance\tphone\tstart_frame\tend_frame\tscore"]
    by_utt = {}
    for s in run.segment_scores:
        by_utt.setdefault(s.utterance_id, []).append(s)
    for alignment in corpus.alignments:
        scores = iter(by_utt.get(alignment.utterance_id, ()))
        for seg in alignment.segments:
            if inv.is_skip_index(seg.phone):
                continue
            s = next(scores)
            seg_lines.append(
                f"{s.utterance_id}\t{inv.label_of(seg.phone)}"
                f"\t{seg.start_frame}\t{seg.end_frame}\t{s.score!r}"
            )
    utt_lines = ["# utterance\tscore\tn_segments"]
    for u in run.utterance_scores:
        utt_lines.append(f"{u.utterance_id}\t{u.score!r}\t{u.n_segments}")
    if run.skipped_utterances:
        utt_lines.append("# skipped utterances (no scorable segments):")
        for utt in run.skipped_utterances:
            utt_lines.append(f"# skipped_utterance\t{utt}")
    return "\n".join(seg_lines) + "\n", "\n".join(utt_lines) + "\n"


def cmd_score(args) -> int:
    method = GopMethod.parse(args.method, args.temperature)
    corpus = load_corpus(args.manifest)
    run = score_corpus(corpus, method, jobs=args.jobs)
    seg_text, utt_text = _score_tables(corpus, run)
    os.makedirs(args.out, exist_ok=True)
    _atomic_write_text(os.path.join(args.out, "segment_scores.tsv"), seg_text)
    _atomic_write_text(os.path.join(args.out, "utterance_scores.tsv"), utt_text)
    print(
        f"scored {len(run.utterance_scores)} utterances "
        f"({len(run.segment_scores)} segments) with {method.label}"
    )
    return EXIT_OK


def _resolve_methods(args):
    if args.method:
        return _parse_methods(args.method, args.temperature)
    if args.temperature is None:
        raise UsageError(
            "the default method grid includes scale rows; pass --temperature "
            "(or an explicit --method list without scale methods)"
        )
    return default_method_grid(args.temperature)


def cmd_evaluate(args) -> int:
    methods = _resolve_methods(args)
    corpus = load_corpus(args.manifest, require_labels=True)
    cells, runs = evaluate_grid(
        corpus, methods, jobs=args.jobs, algorithm=args.algorithm
    )
    best = best_cell(cells)
    phoneme_method = None if (args.no_phonemes or best is None) else best.method
    report = build_report(
        corpus,
        cells,
        runs,
        phoneme_method,
        min_support=args.min_support,
        top_k=args.top_k,
        algorithm=args.algorithm,
    )
    _atomic_write_text(args.out, render_report(report))
    if best is None:
        print("no method produced a defined correlation")
    else:
        print(f"best method: {best.method.label} tau={best.tau!r}")
    print(f"report written to {args.out}")
    return EXIT_OK


def cmd_phoneme_corr(args) -> int:
    if args.top_k < 1:
        raise UsageError(f"--top-k must be >= 1, got {args.top_k}")
    method = GopMethod.parse(args.method, args.temperature)
    corpus = load_corpus(args.manifest, require_labels=True)
    cells, runs = evaluate_grid(
        corpus, (method,), jobs=args.jobs, algorithm=args.algorithm
    )
    report = build_report(
        corpus,
        cells,
        runs,
        method,
        min_support=args.min_support,
        top_k=args.top_k,
        algorithm=args.algorithm,
    )
    _atomic_write_text(args.out, render_report(report))
    if not report.phonemes:
        print("warning: no phone met the minimum support", file=sys.stderr)
    print(f"phoneme report written to {args.out}")
    return EXIT_OK


def cmd_calibrate(args) -> int:
    grid = _parse_float_list(args.grid)
    if not grid:
        raise UsageError("temperature grid is empty")
    if any(not t > 0 for t in grid):
        raise UsageError(f"temperatures must be > 0, got {args.grid!r}")
    corpus = load_corpus(args.manifest)
    best, results = calibrate_temperature(corpus, grid)
    for t, nll in results:
        print(f"T={t:g}\tnll={nll!r}")
    print(f"best temperature: {best:g}")
    if args.out:
        lines = ["# temperature\tnll"]
        lines += [f"{t!r}\t{nll!r}" for t, nll in results]
        _atomic_write_text(args.out, "\n".join(lines) + "\n")
    return EXIT_OK


def cmd_synth(args) -> int:
    degrading = (
        _parse_int_set(args.degrading_phones)
        if args.degrading_phones is not None
        else None
    )
    config = SyntheticConfig(
        n_utterances=args.n_utterances,
        n_phones=args.n_phones,
        frames_per_segment=args.frames_per_segment,
        segments_per_utterance=args.segments_per_utterance,
        severity_levels=args.severity_levels,
        degradation_slope=args.slope,
        noise_scale=args.noise,
        seed=args.seed,
        degrading_phones=degrading,
    )
    out = args.out
    if os.path.isdir(out) and os.listdir(out) and not args.force:
        raise UsageError(
            f"output directory {out!r} is not empty; pass --force to overwrite"
        )
    corpus = generate_synthetic(config)
    os.makedirs(os.path.join(out, "logits"), exist_ok=True)
    write_inventory(corpus.inventory, os.path.join(out, "inventory.tsv"))
    write_alignments(
        corpus.alignments, corpus.inventory, os.path.join(out, "alignments.tsv")
    )
    write_labels(corpus.labels, os.path.join(out, "labels.tsv"))
    write_priors(corpus.prior, corpus.inventory, os.path.join(out, "priors.tsv"))
    entries = {}
    for matrix in corpus.matrices:
        rel = os.path.join("logits", f"{matrix.utterance_id}.flm")
        write_logits(matrix, os.path.join(out, rel))
        entries[matrix.utterance_id] = UtteranceEntry(logits_path=rel)
    write_manifest(
        os.path.join(out, "manifest.json"),
        inventory_path="inventory.tsv",
        alignments_path="alignments.tsv",
        utterances=entries,
        labels_path="labels.tsv",
        priors_path="priors.tsv",
        metadata={"generator": "splitmix64-boxmuller-v1", "seed": config.seed},
    )
    print(f"synthetic corpus with {config.n_utterances} utterances in {out}")
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except (UsageError, ConfigError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except GopError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
