"""Readers and writers for every on-disk artifact.

Binary logit files (FLM): magic b"FLM1", little-endian uint32 n_frames,
little-endian uint32 n_phones, then n_frames * n_phones little-endian
IEEE-754 float32 values, row-major (frame-major). Text artifacts are
UTF-8 TSV with "\\n" line endings; lines starting with "#" and blank
lines are comments. Parsers reject malformed content with position info;
nothing is silently coerced or skipped.
"""

from __future__ import annotations

import hashlib
import json
import math
import os
import struct
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from . import __version__
from .core import (
    FrameLogitMatrix,
    GopMethod,
    PhoneInventory,
    PhonePrior,
    PhoneSegment,
    SeverityLabel,
    UtteranceAlignment,
    expand_labels,
    method_sort_key,
)
from .errors import (
    BadMagicError,
    DataError,
    FormatError,
    NonFiniteValueError,
    TruncatedFileError,
    UnknownLabelError,
    WidthMismatchError,
)
from .stats import PhonemeCorrelation, SkippedPhone

FLM_MAGIC = b"FLM1"
_FLM_HEADER = struct.Struct("<II")


# ---------------------------------------------------------------------------
# binary logit matrices


def write_logits(matrix: FrameLogitMatrix, path) -> None:
    """Write a matrix in the FLM format; values quantize to float32."""
    payload = matrix.values.astype("<f4").tobytes(order="C")
    with open(path, "wb") as f:
        f.write(FLM_MAGIC)
        f.write(_FLM_HEADER.pack(matrix.n_frames, matrix.n_phones))
        f.write(payload)


def read_logits(
    path,
    expected_n_phones: int | None = None,
    utterance_id: str | None = None,
) -> FrameLogitMatrix:
    """Parse an FLM file; every malformed condition raises a distinct error
    carrying the byte offset where parsing failed."""
    with open(path, "rb") as f:
        data = f.read()
    if len(data) < 4 or data[:4] != FLM_MAGIC:
        got = data[:4]
        raise BadMagicError(
            f"expected magic {FLM_MAGIC!r}, found {got!r}", path=path, offset=0
        )
    if len(data) < 12:
        raise TruncatedFileError(
            f"header needs 12 bytes, file has {len(data)}",
            path=path,
            offset=len(data),
        )
    n_frames, n_phones = _FLM_HEADER.unpack_from(data, 4)
    if n_frames < 1:
        raise FormatError("header declares zero frames", path=path, offset=4)
    if n_phones < 1:
        raise FormatError("header declares zero phones", path=path, offset=8)
    if expected_n_phones is not None and n_phones != expected_n_phones:
        raise WidthMismatchError(
            f"file declares {n_phones} phone columns, inventory has "
            f"{expected_n_phones}",
            path=path,
            offset=8,
        )
    expected_end = 12 + 4 * n_frames * n_phones
    if len(data) < expected_end:
        raise TruncatedFileError(
            f"payload ends at byte {len(data)}, header implies {expected_end}",
            path=path,
            offset=len(data),
        )
    if len(data) > expected_end:
        raise FormatError(
            f"{len(data) - expected_end} trailing bytes after payload",
            path=path,
            offset=expected_end,
        )
    flat = np.frombuffer(data, dtype="<f4", count=n_frames * n_phones, offset=12)
    finite = np.isfinite(flat)
    if not finite.all():
        first_bad = int(np.argmin(finite))
        raise NonFiniteValueError(
            f"non-finite value at element {first_bad}",
            path=path,
            offset=12 + 4 * first_bad,
        )
    if utterance_id is None:
        utterance_id = os.path.splitext(os.path.basename(str(path)))[0]
    values = flat.astype(np.float64).reshape(n_frames, n_phones)
    return FrameLogitMatrix(utterance_id=utterance_id, values=values)


# ---------------------------------------------------------------------------
# text artifacts


def _text_lines(path) -> list[tuple[int, str]]:
    """(line_number, content) pairs with comments and blanks dropped."""
    with open(path, "r", encoding="utf-8") as f:
        raw = f.read().split("\n")
    out = []
    for i, line in enumerate(raw, start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        out.append((i, line.rstrip("\r\n")))
    return out


def _split_fields(line: str, n: int, path, lineno) -> list[str]:
    fields = line.split("\t")
    if len(fields) != n:
        raise FormatError(
            f"expected {n} tab-separated fields, got {len(fields)}",
            path=path,
            line=lineno,
        )
    return fields


def read_inventory(path) -> PhoneInventory:
    """One phone label per line, order defining logit columns. Optional
    `#skip:` directive lines name the skip labels; without one, the
    conventional silence labels are skipped if present."""
    with open(path, "r", encoding="utf-8") as f:
        raw = f.read().split("\n")
    labels: list[str] = []
    skips: list[str] = []
    explicit_skip = False
    for lineno, line in enumerate(raw, start=1):
        stripped = line.strip()
        if not stripped:
            continue
        if stripped.startswith("#skip:"):
            explicit_skip = True
            skips.extend(stripped[len("#skip:"):].split())
            continue
        if stripped.startswith("#"):
            continue
        if stripped in labels:
            raise FormatError(
                f"duplicate phone label {stripped!r}", path=path, line=lineno
            )
        labels.append(stripped)
    try:
        if explicit_skip:
            return PhoneInventory.from_labels(labels, skip_labels=skips)
        return PhoneInventory.from_labels(labels)
    except DataError as exc:
        raise FormatError(str(exc), path=path) from exc


def write_inventory(inventory: PhoneInventory, path) -> None:
    lines = []
    if inventory.skip_labels:
        lines.append("#skip: " + " ".join(sorted(inventory.skip_labels)))
    lines.extend(inventory.labels)
    _atomic_write_text(path, "\n".join(lines) + "\n")


def read_alignments(path, inventory: PhoneInventory) -> list[UtteranceAlignment]:
    """Parse `utterance<TAB>phone<TAB>start<TAB>end` lines (end exclusive),
    grouped by utterance, each utterance's segments sorted by start frame."""
    per_utt: dict[str, list[PhoneSegment]] = {}
    last_end: dict[str, int] = {}
    for lineno, line in _text_lines(path):
        utt, label, start_s, end_s = _split_fields(line, 4, path, lineno)
        if not utt:
            raise FormatError("empty utterance id", path=path, line=lineno)
        try:
            phone = inventory.index_of(label)
        except UnknownLabelError as exc:
            raise UnknownLabelError(f"{path}: line {lineno}: {exc}") from exc
        try:
            start, end = int(start_s), int(end_s)
        except ValueError:
            raise FormatError(
                f"frame bounds must be integers, got {start_s!r}/{end_s!r}",
                path=path,
                line=lineno,
            ) from None
        try:
            segment = PhoneSegment(phone=phone, start_frame=start, end_frame=end)
        except DataError as exc:
            raise FormatError(str(exc), path=path, line=lineno) from exc
        if utt in last_end and start < last_end[utt]:
            raise FormatError(
                f"segment [{start}, {end}) overlaps or precedes an earlier "
                f"segment of utterance {utt!r}",
                path=path,
                line=lineno,
            )
        per_utt.setdefault(utt, []).append(segment)
        last_end[utt] = end
    return [
        UtteranceAlignment(utterance_id=utt, segments=tuple(segments))
        for utt, segments in per_utt.items()
    ]


def write_alignments(
    alignments: Iterable[UtteranceAlignment],
    inventory: PhoneInventory,
    path,
) -> None:
    lines = []
    for alignment in alignments:
        for seg in alignment.segments:
            lines.append(
                f"{alignment.utterance_id}\t{inventory.label_of(seg.phone)}"
                f"\t{seg.start_frame}\t{seg.end_frame}"
            )
    _atomic_write_text(path, "\n".join(lines) + "\n")


def read_labels(path) -> list[SeverityLabel]:
    """Parse `key<TAB>severity` lines; keys may be utterance or speaker ids."""
    labels: list[SeverityLabel] = []
    seen: dict[str, int] = {}
    for lineno, line in _text_lines(path):
        key, severity_s = _split_fields(line, 2, path, lineno)
        try:
            severity = int(severity_s)
        except ValueError:
            raise FormatError(
                f"severity must be an integer, got {severity_s!r}",
                path=path,
                line=lineno,
            ) from None
        if severity < 0:
            raise FormatError(
                f"severity must be >= 0, got {severity}", path=path, line=lineno
            )
        if key in seen:
            raise FormatError(
                f"duplicate label key {key!r} (first on line {seen[key]})",
                path=path,
                line=lineno,
            )
        seen[key] = lineno
        try:
            labels.append(SeverityLabel(key=key, severity=severity))
        except DataError as exc:
            raise FormatError(str(exc), path=path, line=lineno) from exc
    return labels


def write_labels(labels: Iterable[SeverityLabel], path) -> None:
    lines = [f"{l.key}\t{l.severity}" for l in labels]
    _atomic_write_text(path, "\n".join(lines) + "\n")


def read_priors(path, inventory: PhoneInventory) -> PhonePrior:
    """Parse `phone<TAB>probability`, one line per phone, every phone
    exactly once. The sum must land within 1e-6 of 1; entries are then
    renormalized so the in-memory prior sums to 1 within 1e-12."""
    probs = np.zeros(len(inventory))
    seen: dict[str, int] = {}
    for lineno, line in _text_lines(path):
        label, prob_s = _split_fields(line, 2, path, lineno)
        try:
            idx = inventory.index_of(label)
        except UnknownLabelError as exc:
            raise UnknownLabelError(f"{path}: line {lineno}: {exc}") from exc
        if label in seen:
            raise FormatError(
                f"duplicate prior for {label!r}", path=path, line=lineno
            )
        seen[label] = lineno
        try:
            prob = float(prob_s)
        except ValueError:
            raise FormatError(
                f"probability must be a number, got {prob_s!r}",
                path=path,
                line=lineno,
            ) from None
        if not math.isfinite(prob) or prob <= 0.0:
            raise FormatError(
                f"prior for {label!r} must be finite and > 0, got {prob!r}",
                path=path,
                line=lineno,
            )
        probs[idx] = prob
    missing = [l for l in inventory.labels if l not in seen]
    if missing:
        raise FormatError(f"missing priors for phones: {missing}", path=path)
    total = float(probs.sum())
    if abs(total - 1.0) > 1e-6:
        raise FormatError(
            f"priors sum to {total!r}, expected 1 within 1e-6", path=path
        )
    return PhonePrior(probs=probs / total)


def write_priors(prior: PhonePrior, inventory: PhoneInventory, path) -> None:
    lines = [
        f"{label}\t{float(prior.probs[i])!r}"
        for i, label in enumerate(inventory.labels)
    ]
    _atomic_write_text(path, "\n".join(lines) + "\n")


def estimate_priors(
    alignments: Sequence[UtteranceAlignment],
    inventory: PhoneInventory,
    mode: str = "frames",
) -> PhonePrior:
    """Add-one smoothed phone frequencies over non-skip segments.

    mode "frames" (default) counts aligned frames per phone; mode
    "segments" counts occurrences instead. Smoothing keeps every phone
    strictly positive, including phones that never occur.
    """
    if mode not in ("frames", "segments"):
        raise DataError(f"unknown prior estimation mode {mode!r}")
    counts = np.zeros(len(inventory), dtype=np.int64)
    scorable = 0
    for alignment in alignments:
        for seg in alignment.scorable_segments(inventory):
            counts[seg.phone] += seg.n_frames if mode == "frames" else 1
            scorable += 1
    if scorable == 0:
        raise DataError("no scorable (non-skip) segments to estimate priors")
    smoothed = (counts + 1).astype(np.float64)
    return PhonePrior(probs=smoothed / smoothed.sum())


# ---------------------------------------------------------------------------
# manifest and corpus loading

MANIFEST_FORMAT = "gopeval-manifest-v1"


@dataclass(frozen=True)
class UtteranceEntry:
    logits_path: str
    speaker: str | None = None


@dataclass(frozen=True)
class CorpusManifest:
    """Index tying the corpus files together; paths are relative to the
    manifest's own directory."""

    root: str
    inventory_path: str
    alignments_path: str
    utterances: Mapping[str, UtteranceEntry]
    labels_path: str | None = None
    priors_path: str | None = None
    metadata: Mapping[str, object] = field(default_factory=dict)

    def resolve(self, relpath: str) -> str:
        return os.path.normpath(os.path.join(self.root, relpath))


def read_manifest(path) -> CorpusManifest:
    with open(path, "r", encoding="utf-8") as f:
        try:
            doc = json.load(f)
        except json.JSONDecodeError as exc:
            raise FormatError(f"invalid JSON: {exc}", path=path) from exc
    if not isinstance(doc, dict):
        raise FormatError("manifest must be a JSON object", path=path)
    for key in ("inventory", "alignments", "utterances"):
        if key not in doc:
            raise FormatError(f"manifest missing {key!r}", path=path)
    utterances = {}
    if not isinstance(doc["utterances"], dict):
        raise FormatError("'utterances' must be an object", path=path)
    for utt, entry in doc["utterances"].items():
        if not isinstance(entry, dict) or "logits" not in entry:
            raise FormatError(
                f"utterance {utt!r} entry needs a 'logits' path", path=path
            )
        utterances[utt] = UtteranceEntry(
            logits_path=entry["logits"], speaker=entry.get("speaker")
        )
    return CorpusManifest(
        root=os.path.dirname(os.path.abspath(str(path))),
        inventory_path=doc["inventory"],
        alignments_path=doc["alignments"],
        utterances=utterances,
        labels_path=doc.get("labels"),
        priors_path=doc.get("priors"),
        metadata=doc.get("metadata", {}),
    )


def write_manifest(
    path,
    inventory_path: str,
    alignments_path: str,
    utterances: Mapping[str, UtteranceEntry],
    labels_path: str | None = None,
    priors_path: str | None = None,
    metadata: Mapping[str, object] | None = None,
) -> None:
    doc = {
        "format": MANIFEST_FORMAT,
        "inventory": inventory_path,
        "alignments": alignments_path,
        "utterances": {
            utt: (
                {"logits": e.logits_path, "speaker": e.speaker}
                if e.speaker is not None
                else {"logits": e.logits_path}
            )
            for utt, e in sorted(utterances.items())
        },
    }
    if labels_path is not None:
        doc["labels"] = labels_path
    if priors_path is not None:
        doc["priors"] = priors_path
    if metadata:
        doc["metadata"] = dict(sorted(metadata.items()))
    _atomic_write_text(path, json.dumps(doc, indent=2, sort_keys=True) + "\n")


def manifest_digest(path) -> str:
    with open(path, "rb") as f:
        return hashlib.sha256(f.read()).hexdigest()


@dataclass(frozen=True)
class Corpus:
    """Fully loaded, validated corpus ready for scoring."""

    inventory: PhoneInventory
    matrices: Mapping[str, FrameLogitMatrix]
    alignments: tuple[UtteranceAlignment, ...]
    severity_by_utterance: Mapping[str, int] | None
    prior: PhonePrior
    manifest_digest: str


def load_corpus(manifest_path, require_labels: bool = False) -> Corpus:
    """Read and cross-validate everything the manifest references.

    The prior comes from the manifest's priors file when present, else
    from add-one-smoothed frame frequencies of the alignments. Alignments
    come back sorted by utterance id (the canonical processing order).
    """
    manifest = read_manifest(manifest_path)
    inventory = read_inventory(manifest.resolve(manifest.inventory_path))
    alignments = read_alignments(
        manifest.resolve(manifest.alignments_path), inventory
    )
    alignments.sort(key=lambda a: a.utterance_id)
    aligned_ids = {a.utterance_id for a in alignments}
    missing_logits = sorted(aligned_ids - set(manifest.utterances))
    if missing_logits:
        raise DataError(
            f"aligned utterances without logit files: {missing_logits[:10]}"
        )
    matrices: dict[str, FrameLogitMatrix] = {}
    for utt, entry in sorted(manifest.utterances.items()):
        matrices[utt] = read_logits(
            manifest.resolve(entry.logits_path),
            expected_n_phones=len(inventory),
            utterance_id=utt,
        )
    for alignment in alignments:
        last = alignment.segments[-1]
        n_frames = matrices[alignment.utterance_id].n_frames
        if last.end_frame > n_frames:
            raise DataError(
                f"utterance {alignment.utterance_id!r}: alignment ends at "
                f"frame {last.end_frame}, matrix has {n_frames}"
            )
    severity = None
    if manifest.labels_path is not None:
        labels = read_labels(manifest.resolve(manifest.labels_path))
        speaker_of = {u: e.speaker for u, e in manifest.utterances.items()}
        severity = expand_labels(labels, speaker_of, sorted(aligned_ids))
    elif require_labels:
        raise DataError("manifest has no labels file, but labels are required")
    if manifest.priors_path is not None:
        prior = read_priors(manifest.resolve(manifest.priors_path), inventory)
    else:
        prior = estimate_priors(alignments, inventory)
    return Corpus(
        inventory=inventory,
        matrices=matrices,
        alignments=tuple(alignments),
        severity_by_utterance=severity,
        prior=prior,
        manifest_digest=manifest_digest(manifest_path),
    )


# ---------------------------------------------------------------------------
# evaluation report


@dataclass(frozen=True)
class MethodCell:
    """One method-grid cell: either a tau or the reason it is undefined."""

    method: GopMethod
    tau: float | None
    n_items: int
    n_pairs: int
    error: str | None = None


@dataclass(frozen=True)
class PhonemeRow:
    label: str
    tau: float
    n_segments: int


@dataclass(frozen=True)
class SkippedPhoneRow:
    label: str
    n_segments: int
    reason: str


@dataclass(frozen=True)
class EvaluationReport:
    manifest_digest: str
    cells: tuple[MethodCell, ...]
    phonemes: tuple[PhonemeRow, ...] = ()
    skipped_phones: tuple[SkippedPhoneRow, ...] = ()
    top_k: tuple[PhonemeRow, ...] | None = None
    version: str = __version__


def phoneme_rows(
    correlations: Sequence[PhonemeCorrelation],
    inventory: PhoneInventory,
) -> tuple[PhonemeRow, ...]:
    return tuple(
        PhonemeRow(inventory.label_of(c.phone), c.tau, c.n_segments)
        for c in correlations
    )


def skipped_phone_rows(
    skipped: Sequence[SkippedPhone], inventory: PhoneInventory
) -> tuple[SkippedPhoneRow, ...]:
    return tuple(
        SkippedPhoneRow(inventory.label_of(s.phone), s.n_segments, s.reason)
        for s in skipped
    )


def _fmt_tau(tau: float | None) -> str:
    return "nan" if tau is None else repr(tau)


def render_report(report: EvaluationReport) -> str:
    """Deterministic text rendering: same report object, same bytes.

    The [methods] section doubles as the flat table for spreadsheets; tau
    values use repr so they round-trip exactly.
    """
    lines = [
        "# pronunciation scoring evaluation report",
        "format: gopeval-report-v1",
        f"version: {report.version}",
        f"manifest_sha256: {report.manifest_digest}",
        "",
        "[methods]",
        "normalization\tscoring\ttemperature\ttau\tabs_tau\tn_items\tn_pairs\tstatus",
    ]
    cells = sorted(report.cells, key=lambda c: method_sort_key(c.method))
    for cell in cells:
        m = cell.method
        t = "-" if m.temperature is None else repr(m.temperature)
        abs_tau = "nan" if cell.tau is None else repr(abs(cell.tau))
        status = "ok" if cell.error is None else cell.error
        lines.append(
            f"{m.normalization.value}\t{m.scoring.value}\t{t}"
            f"\t{_fmt_tau(cell.tau)}\t{abs_tau}\t{cell.n_items}"
            f"\t{cell.n_pairs}\t{status}"
        )
    lines += ["", "[phonemes]", "phone\ttau\tabs_tau\tn_segments"]
    for row in report.phonemes:
        lines.append(
            f"{row.label}\t{row.tau!r}\t{abs(row.tau)!r}\t{row.n_segments}"
        )
    if report.top_k is not None:
        lines += ["", "[top_k]", "rank\tphone\ttau\tabs_tau\tn_segments"]
        for rank, row in enumerate(report.top_k, start=1):
            lines.append(
                f"{rank}\t{row.label}\t{row.tau!r}\t{abs(row.tau)!r}"
                f"\t{row.n_segments}"
            )
    lines += ["", "[skipped_phones]", "phone\tn_segments\treason"]
    for row in report.skipped_phones:
        lines.append(f"{row.label}\t{row.n_segments}\t{row.reason}")
    return "\n".join(lines) + "\n"


def write_report(report: EvaluationReport, path) -> None:
    _atomic_write_text(path, render_report(report))


def parse_report_methods(text: str) -> dict[str, float]:
    """Read back the [methods] section as {'norm:scoring': tau}; undefined
    cells map to nan. The inverse of render_report for the table part."""
    taus: dict[str, float] = {}
    in_methods = False
    for line in text.splitlines():
        if line.startswith("["):
            in_methods = line == "[methods]"
            continue
        if not in_methods or not line or line.startswith("normalization\t"):
            continue
        fields = line.split("\t")
        taus[f"{fields[0]}:{fields[1]}"] = float(fields[3])
    return taus


# ---------------------------------------------------------------------------


def _atomic_write_text(path, text: str) -> None:
    """Write-then-rename so failed runs never leave partial tables."""
    tmp = f"{path}.tmp"
    with open(tmp, "w", encoding="utf-8", newline="\n") as f:
        f.write(text)
    os.replace(tmp, path)
