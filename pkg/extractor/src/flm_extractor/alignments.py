"""Seconds-based alignments (CTM or TextGrid) -> engine frame TSV.

Conversion rule: start_frame = floor(start_sec * rate),
end_frame = ceil(end_sec * rate), clamped to the matrix bounds when
given. Intervals that come out empty are dropped with a warning.
Labels can be rewritten through a user mapping table first; anything
still missing from the inventory is an error listing every offender.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence


class AlignmentError(Exception):
    """Malformed source alignment or unmappable labels."""


@dataclass(frozen=True)
class FrameInterval:
    utterance_id: str
    label: str
    start_frame: int
    end_frame: int


# TextGrid silence conventions folded onto the engine's silence label.
DEFAULT_LABEL_MAP = {"": "sil", "sp": "sil", "spn": "sil", "SIL": "sil"}


def seconds_to_frames(
    start_sec: float, end_sec: float, frame_rate: float
) -> tuple[int, int]:
    return (
        math.floor(start_sec * frame_rate),
        math.ceil(end_sec * frame_rate),
    )


def read_ctm(path) -> list[tuple[str, float, float, str]]:
    """Parse `utt channel start dur label` rows into (utt, start, end, label)."""
    rows = []
    with open(path, "r", encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            stripped = line.strip()
            if not stripped or stripped.startswith(("#", ";;")):
                continue
            fields = stripped.split()
            if len(fields) < 5:
                raise AlignmentError(
                    f"{path}: line {lineno}: expected "
                    f"'utt channel start dur label', got {len(fields)} fields"
                )
            utt, _, start_s, dur_s, label = fields[:5]
            try:
                start, dur = float(start_s), float(dur_s)
            except ValueError:
                raise AlignmentError(
                    f"{path}: line {lineno}: non-numeric time"
                ) from None
            rows.append((utt, start, start + dur, label))
    return rows


_TG_FLOAT = re.compile(r"(xmin|xmax)\s*=\s*([0-9.eE+-]+)")
_TG_TEXT = re.compile(r'text\s*=\s*"(.*)"')
_TG_TIER_NAME = re.compile(r'name\s*=\s*"(.*)"')
_TG_TIER_CLASS = re.compile(r'class\s*=\s*"(.*)"')


def read_textgrid(path, tier: str = "phones") -> list[tuple[float, float, str]]:
    """Intervals (start, end, label) of one IntervalTier of a long-format
    TextGrid. The utterance id is up to the caller (usually the stem)."""
    with open(path, "r", encoding="utf-8") as f:
        content = f.read()
    chunks = re.split(r"item\s*\[\d+\]\s*:", content)
    for chunk in chunks[1:]:
        klass = _TG_TIER_CLASS.search(chunk)
        name = _TG_TIER_NAME.search(chunk)
        if not klass or "IntervalTier" not in klass.group(1):
            continue
        if name and name.group(1) != tier:
            continue
        intervals = []
        for part in re.split(r"intervals\s*\[\d+\]\s*:", chunk)[1:]:
            times = _TG_FLOAT.findall(part)
            text = _TG_TEXT.search(part)
            bounds = {k: float(v) for k, v in times[:2]}
            if "xmin" not in bounds or "xmax" not in bounds or text is None:
                raise AlignmentError(f"{path}: malformed interval in tier")
            intervals.append((bounds["xmin"], bounds["xmax"], text.group(1)))
        return intervals
    raise AlignmentError(f"{path}: no IntervalTier named {tier!r}")


def convert_intervals(
    intervals: Sequence[tuple[str, float, float, str]],
    frame_rate: float,
    inventory_labels: Iterable[str],
    label_map: Mapping[str, str] | None = None,
    n_frames_of: Mapping[str, int] | None = None,
) -> tuple[list[FrameInterval], list[str]]:
    """Map (utt, start_sec, end_sec, label) rows to frame intervals.

    Returns (converted rows, warnings). Empty-after-conversion intervals
    are dropped with a warning; labels missing from the inventory after
    mapping abort with the full offender list.
    """
    mapping = dict(DEFAULT_LABEL_MAP)
    if label_map:
        mapping.update(label_map)
    known = set(inventory_labels)
    out: list[FrameInterval] = []
    warnings: list[str] = []
    unknown: set[str] = set()
    for utt, start_sec, end_sec, raw_label in intervals:
        label = mapping.get(raw_label, raw_label)
        if label not in known:
            unknown.add(raw_label)
            continue
        start, end = seconds_to_frames(start_sec, end_sec, frame_rate)
        start = max(0, start)
        if n_frames_of is not None and utt in n_frames_of:
            end = min(end, n_frames_of[utt])
        if end <= start:
            warnings.append(
                f"dropped empty interval {raw_label!r} "
                f"[{start_sec:g}s, {end_sec:g}s) of {utt}"
            )
            continue
        out.append(FrameInterval(utt, label, start, end))
    if unknown:
        raise AlignmentError(
            "labels not in inventory (extend the mapping table): "
            f"{sorted(unknown)}"
        )
    return out, warnings


def resolve_overlaps(
    rows: Sequence[FrameInterval],
) -> tuple[list[FrameInterval], list[str]]:
    """Make each utterance's intervals non-overlapping.

    floor/ceil conversion overlaps adjacent intervals by one frame
    whenever a boundary is not frame-aligned; the engine rejects that.
    The later interval's start is bumped to the earlier one's end (ceil
    wins), and intervals squeezed empty are dropped with a warning.
    Input must already be sorted by (utterance, start_frame).
    """
    out: list[FrameInterval] = []
    warnings: list[str] = []
    last_end: dict[str, int] = {}
    for row in rows:
        start = max(row.start_frame, last_end.get(row.utterance_id, 0))
        if start >= row.end_frame:
            warnings.append(
                f"dropped interval {row.label!r} "
                f"[{row.start_frame}, {row.end_frame}) of {row.utterance_id}: "
                f"swallowed by the previous interval"
            )
            continue
        if start != row.start_frame:
            row = FrameInterval(row.utterance_id, row.label, start, row.end_frame)
        out.append(row)
        last_end[row.utterance_id] = row.end_frame
    return out, warnings


def render_alignment_tsv(rows: Sequence[FrameInterval]) -> str:
    lines = [
        f"{r.utterance_id}\t{r.label}\t{r.start_frame}\t{r.end_frame}"
        for r in rows
    ]
    return "\n".join(lines) + "\n"
