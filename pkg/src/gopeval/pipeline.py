"""Batch runs over a loaded corpus: scoring, the method grid, calibration.

Utterances are embarrassingly parallel; workers score them concurrently
while results are buffered and emitted in canonical (utterance id) order,
so outputs are byte-identical regardless of the jobs setting.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .core import GopMethod, UtteranceAlignment
from .errors import ConfigError, DataError, UndefinedCorrelationError
from .formats import (
    Corpus,
    EvaluationReport,
    MethodCell,
    phoneme_rows,
    skipped_phone_rows,
)
from .posterior import log_softmax
from .scores import SegmentScore, score_segment
from .stats import (
    UtteranceScore,
    aggregate_utterance,
    evaluate_method,
    phoneme_correlations,
    top_k_phonemes,
)


@dataclass(frozen=True)
class ScoreRun:
    """All scores of one method over one corpus."""

    method: GopMethod
    segment_scores: tuple[SegmentScore, ...]
    utterance_scores: tuple[UtteranceScore, ...]
    skipped_utterances: tuple[str, ...]


def _score_one(corpus: Corpus, alignment: UtteranceAlignment, method: GopMethod):
    matrix = corpus.matrices[alignment.utterance_id]
    prior = corpus.prior if method.needs_prior else None
    scores = []
    for segment in alignment.segments:
        s = score_segment(matrix, segment, method, corpus.inventory, prior)
        if s is not None:
            scores.append(s)
    return scores


def score_corpus(corpus: Corpus, method: GopMethod, jobs: int = 1) -> ScoreRun:
    """Score every aligned utterance under one method.

    Utterances whose segments are all skip-labeled are reported in
    skipped_utterances rather than scored.
    """
    if jobs < 1:
        raise ConfigError(f"jobs must be >= 1, got {jobs}")
    if jobs == 1:
        per_utt = [_score_one(corpus, a, method) for a in corpus.alignments]
    else:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            per_utt = list(
                pool.map(lambda a: _score_one(corpus, a, method), corpus.alignments)
            )
    segment_scores: list[SegmentScore] = []
    utterance_scores: list[UtteranceScore] = []
    skipped: list[str] = []
    for alignment, scores in zip(corpus.alignments, per_utt):
        if not scores:
            skipped.append(alignment.utterance_id)
            continue
        segment_scores.extend(scores)
        utterance_scores.append(aggregate_utterance(scores))
    return ScoreRun(
        method=method,
        segment_scores=tuple(segment_scores),
        utterance_scores=tuple(utterance_scores),
        skipped_utterances=tuple(skipped),
    )


def evaluate_grid(
    corpus: Corpus,
    methods: tuple[GopMethod, ...],
    jobs: int = 1,
    algorithm: str = "fast",
) -> tuple[list[MethodCell], dict[GopMethod, ScoreRun]]:
    """Run every grid cell; undefined correlations become per-cell errors
    instead of aborting the run."""
    if corpus.severity_by_utterance is None:
        raise DataError("corpus has no severity labels; cannot evaluate")
    cells: list[MethodCell] = []
    runs: dict[GopMethod, ScoreRun] = {}
    for method in methods:
        run = score_corpus(corpus, method, jobs=jobs)
        runs[method] = run
        n_items = len(run.utterance_scores)
        try:
            evaluation = evaluate_method(
                run.utterance_scores,
                corpus.severity_by_utterance,
                method,
                algorithm=algorithm,
            )
        except UndefinedCorrelationError as exc:
            cells.append(
                MethodCell(
                    method=method,
                    tau=None,
                    n_items=n_items,
                    n_pairs=n_items * (n_items - 1) // 2,
                    error=f"undefined-correlation: {exc}",
                )
            )
            continue
        cells.append(
            MethodCell(
                method=method,
                tau=evaluation.result.tau,
                n_items=evaluation.result.n_items,
                n_pairs=evaluation.result.n_pairs,
            )
        )
    return cells, runs


def best_cell(cells: list[MethodCell]) -> MethodCell | None:
    """Most negative tau among defined cells; None if nothing is defined."""
    defined = [c for c in cells if c.tau is not None]
    if not defined:
        return None
    return min(defined, key=lambda c: (c.tau, c.method.label))


def build_report(
    corpus: Corpus,
    cells: list[MethodCell],
    runs: dict[GopMethod, ScoreRun],
    phoneme_method: GopMethod | None,
    min_support: int = 10,
    top_k: int | None = None,
    algorithm: str = "fast",
) -> EvaluationReport:
    """Assemble the report; the phoneme section uses phoneme_method's
    segment scores (pass None to leave the section empty)."""
    phonemes = ()
    skipped = ()
    ranked = None
    if phoneme_method is not None:
        run = runs[phoneme_method]
        correlations, skipped_phones = phoneme_correlations(
            run.segment_scores,
            corpus.severity_by_utterance,
            min_support=min_support,
            algorithm=algorithm,
        )
        phonemes = phoneme_rows(correlations, corpus.inventory)
        skipped = skipped_phone_rows(skipped_phones, corpus.inventory)
        if top_k is not None:
            ranked = phoneme_rows(
                top_k_phonemes(correlations, top_k, corpus.inventory),
                corpus.inventory,
            )
    return EvaluationReport(
        manifest_digest=corpus.manifest_digest,
        cells=tuple(cells),
        phonemes=phonemes,
        skipped_phones=skipped,
        top_k=ranked,
    )


def calibrate_temperature(
    corpus: Corpus, grid: tuple[float, ...]
) -> tuple[float, list[tuple[float, float]]]:
    """Grid-search the temperature minimizing mean frame-level negative log
    probability of the canonical phone over all non-skip segments.

    Returns (best temperature, [(T, nll) per grid point]); ties go to the
    smaller T.
    """
    if not grid:
        raise ConfigError("temperature grid must be non-empty")
    if any(not t > 0 for t in grid):
        raise ConfigError(f"temperatures must be > 0, got {list(grid)}")
    frames: list[tuple[np.ndarray, int]] = []
    for alignment in corpus.alignments:
        matrix = corpus.matrices[alignment.utterance_id]
        for seg in alignment.scorable_segments(corpus.inventory):
            for f in range(seg.start_frame, seg.end_frame):
                frames.append((matrix.values[f], seg.phone))
    if not frames:
        raise DataError("no scorable frames; cannot calibrate")
    results: list[tuple[float, float]] = []
    for t in grid:
        total = 0.0
        for logits, phone in frames:
            total -= float(log_softmax(logits / t)[phone])
        results.append((t, total / len(frames)))
    best = min(results, key=lambda r: (r[1], r[0]))
    return best[0], results
