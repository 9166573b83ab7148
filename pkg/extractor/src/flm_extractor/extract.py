"""The extraction job: audio files in, an engine-ready corpus directory out.

The extractor never scores anything; it decodes audio, runs the
classifier, and serializes. Per-file failures do not abort the job --
they are recorded in the manifest metadata so a batch over thousands of
files survives the odd corrupt recording.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from typing import Mapping, Sequence

from .alignments import (
    FrameInterval,
    convert_intervals,
    read_ctm,
    read_textgrid,
    render_alignment_tsv,
    resolve_overlaps,
)
from .audio import AudioError, read_audio, resample_linear
from .emit import write_flm, write_inventory_tsv, write_manifest_json, _write_text
from .model import DEFAULT_MODEL, resolve_model


@dataclass(frozen=True)
class ExtractionJob:
    audio_paths: tuple[str, ...]
    out_dir: str
    model: str = DEFAULT_MODEL
    # seconds-based alignment sources, converted to frames on emit
    ctm_path: str | None = None
    textgrid_paths: tuple[str, ...] = ()
    textgrid_tier: str = "phones"
    label_map: Mapping[str, str] = field(default_factory=dict)


@dataclass(frozen=True)
class ExtractionResult:
    manifest_path: str
    utterances: tuple[str, ...]
    failures: tuple[tuple[str, str], ...]
    frame_rate: float


def _utterance_id(path) -> str:
    return os.path.splitext(os.path.basename(str(path)))[0]


def extract_logits(job: ExtractionJob) -> ExtractionResult:
    """Run the classifier over every audio file and write the corpus.

    Emits logits/<utt>.flm per decodable file, inventory.tsv,
    alignments.tsv (when alignment sources are given), and
    manifest.json. Frame counts follow the model's stride arithmetic
    exactly: ceil(n_samples / hop) after resampling to the model rate.
    """
    classifier = resolve_model(job.model)
    os.makedirs(os.path.join(job.out_dir, "logits"), exist_ok=True)

    utterances: dict[str, str] = {}
    n_frames_of: dict[str, int] = {}
    failures: list[tuple[str, str]] = []
    for path in job.audio_paths:
        utt = _utterance_id(path)
        try:
            samples, rate = read_audio(path)
            samples = resample_linear(samples, rate, classifier.sample_rate)
            logits = classifier.logits(samples)
            expected = classifier.n_frames(samples.size)
            if logits.shape != (expected, len(classifier.labels)):
                raise RuntimeError(
                    f"classifier produced {logits.shape}, expected "
                    f"({expected}, {len(classifier.labels)})"
                )
        except (AudioError, RuntimeError, OSError) as exc:
            failures.append((str(path), str(exc)))
            continue
        rel = os.path.join("logits", f"{utt}.flm")
        write_flm(os.path.join(job.out_dir, rel), logits)
        utterances[utt] = rel
        n_frames_of[utt] = logits.shape[0]

    write_inventory_tsv(
        os.path.join(job.out_dir, "inventory.tsv"), classifier.labels
    )

    rows: list[FrameInterval] = []
    warnings: list[str] = []
    if job.ctm_path:
        converted, warned = convert_intervals(
            read_ctm(job.ctm_path),
            classifier.frame_rate,
            classifier.labels,
            job.label_map,
            n_frames_of,
        )
        rows.extend(converted)
        warnings.extend(warned)
    for tg in job.textgrid_paths:
        utt = _utterance_id(tg)
        intervals = [
            (utt, start, end, label)
            for start, end, label in read_textgrid(tg, job.textgrid_tier)
        ]
        converted, warned = convert_intervals(
            intervals,
            classifier.frame_rate,
            classifier.labels,
            job.label_map,
            n_frames_of,
        )
        rows.extend(converted)
        warnings.extend(warned)
    if rows:
        rows.sort(key=lambda r: (r.utterance_id, r.start_frame, r.end_frame))
        rows, overlap_warnings = resolve_overlaps(rows)
        warnings.extend(overlap_warnings)
        _write_text(
            os.path.join(job.out_dir, "alignments.tsv"),
            render_alignment_tsv(rows),
        )

    metadata: dict[str, object] = {
        "frame_rate": classifier.frame_rate,
        "model": job.model,
        "sample_rate": classifier.sample_rate,
        "hop_samples": classifier.hop,
        "window_samples": classifier.window,
    }
    if failures:
        metadata["failures"] = {path: reason for path, reason in sorted(failures)}
    if warnings:
        metadata["alignment_warnings"] = sorted(warnings)
    manifest_path = os.path.join(job.out_dir, "manifest.json")
    write_manifest_json(manifest_path, utterances, metadata=metadata)
    return ExtractionResult(
        manifest_path=manifest_path,
        utterances=tuple(sorted(utterances)),
        failures=tuple(failures),
        frame_rate=classifier.frame_rate,
    )
