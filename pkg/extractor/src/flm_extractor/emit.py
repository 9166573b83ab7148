"""Serializers for the scoring engine's on-disk contract.

Implemented against the published formats (FLM binary, inventory TSV,
manifest JSON) rather than by importing the engine, so this package
stays decoupled; the engine's own readers are the contract test.
"""

from __future__ import annotations

import json
import os
import struct
from typing import Iterable, Mapping

import numpy as np

FLM_MAGIC = b"FLM1"


def write_flm(path, values: np.ndarray) -> None:
    """values: (n_frames, n_phones) floats; stored as little-endian f32."""
    arr = np.asarray(values)
    if arr.ndim != 2 or arr.shape[0] < 1:
        raise ValueError(f"logits must be a non-empty 2-D array, got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("refusing to write non-finite logits")
    with open(path, "wb") as f:
        f.write(FLM_MAGIC)
        f.write(struct.pack("<II", arr.shape[0], arr.shape[1]))
        f.write(arr.astype("<f4").tobytes(order="C"))


def write_inventory_tsv(path, labels: Iterable[str], skip_labels=("sil",)) -> None:
    labels = list(labels)
    skips = [l for l in skip_labels if l in labels]
    lines = []
    if skips:
        lines.append("#skip: " + " ".join(sorted(skips)))
    lines.extend(labels)
    _write_text(path, "\n".join(lines) + "\n")


def write_manifest_json(
    path,
    utterances: Mapping[str, str],
    inventory: str = "inventory.tsv",
    alignments: str = "alignments.tsv",
    labels: str | None = None,
    priors: str | None = None,
    metadata: Mapping[str, object] | None = None,
) -> None:
    doc: dict = {
        "format": "gopeval-manifest-v1",
        "inventory": inventory,
        "alignments": alignments,
        "utterances": {
            utt: {"logits": rel} for utt, rel in sorted(utterances.items())
        },
    }
    if labels is not None:
        doc["labels"] = labels
    if priors is not None:
        doc["priors"] = priors
    if metadata:
        doc["metadata"] = dict(sorted(metadata.items()))
    _write_text(path, json.dumps(doc, indent=2, sort_keys=True) + "\n")


def _write_text(path, text: str) -> None:
    tmp = f"{path}.tmp"
    with open(tmp, "w", encoding="utf-8", newline="\n") as f:
        f.write(text)
    os.replace(tmp, path)
