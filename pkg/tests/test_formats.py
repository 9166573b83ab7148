import json
import math
import struct

import numpy as np
import pytest

from gopeval import (
    DataError,
    FormatError,
    FrameLogitMatrix,
    PhoneInventory,
    PhonePrior,
    PhoneSegment,
    SeverityLabel,
    UnknownLabelError,
    UtteranceAlignment,
    estimate_priors,
    load_corpus,
    read_alignments,
    read_inventory,
    read_labels,
    read_logits,
    read_manifest,
    read_priors,
    render_report,
    write_alignments,
    write_inventory,
    write_labels,
    write_logits,
    write_manifest,
    write_priors,
)
from gopeval.errors import (
    BadMagicError,
    NonFiniteValueError,
    TruncatedFileError,
    WidthMismatchError,
)
from gopeval.formats import (
    EvaluationReport,
    MethodCell,
    UtteranceEntry,
    parse_report_methods,
)
from gopeval.core import GopMethod, Normalization, Scoring

GOLDEN_1X2 = bytes.fromhex("464c4d31" "01000000" "02000000" "00000000" "0000803f")


# --- FLM binary format --------------------------------------------------------


def test_flm_golden_bytes_write(tmp_path):
    path = tmp_path / "m.flm"
    write_logits(FrameLogitMatrix("m", np.array([[0.0, 1.0]])), path)
    assert path.read_bytes() == GOLDEN_1X2


def test_flm_golden_bytes_read(tmp_path):
    path = tmp_path / "m.flm"
    path.write_bytes(GOLDEN_1X2)
    matrix = read_logits(path)
    assert matrix.utterance_id == "m"
    assert matrix.values.shape == (1, 2)
    assert matrix.values[0, 0] == 0.0
    assert matrix.values[0, 1] == 1.0


def test_flm_roundtrip_quantizes_to_float32(tmp_path):
    rng = np.random.default_rng(1)
    values = rng.normal(size=(17, 5)) * 10
    path = tmp_path / "r.flm"
    write_logits(FrameLogitMatrix("r", values), path)
    back = read_logits(path, expected_n_phones=5)
    assert np.array_equal(back.values, values.astype(np.float32).astype(np.float64))


def test_flm_bad_magic(tmp_path):
    path = tmp_path / "bad.flm"
    path.write_bytes(b"FLM2" + GOLDEN_1X2[4:])
    with pytest.raises(BadMagicError, match="byte 0"):
        read_logits(path)


def test_flm_truncated_header(tmp_path):
    path = tmp_path / "short.flm"
    path.write_bytes(b"FLM1\x01\x00")
    with pytest.raises(TruncatedFileError):
        read_logits(path)


def test_flm_truncated_payload_reports_offset(tmp_path):
    path = tmp_path / "trunc.flm"
    # header claims 3 frames x 2 phones, payload holds 2 frames
    payload = struct.pack("<4f", 0.0, 1.0, 2.0, 3.0)
    path.write_bytes(b"FLM1" + struct.pack("<II", 3, 2) + payload)
    with pytest.raises(TruncatedFileError, match="28") as err:
        read_logits(path)
    assert "36" in str(err.value)  # expected end = 12 + 4*6


def test_flm_trailing_bytes_rejected(tmp_path):
    path = tmp_path / "trail.flm"
    path.write_bytes(GOLDEN_1X2 + b"\x00")
    with pytest.raises(FormatError, match="trailing"):
        read_logits(path)


def test_flm_nan_payload_offset(tmp_path):
    path = tmp_path / "nan.flm"
    payload = struct.pack("<2f", 0.0, float("nan"))
    path.write_bytes(b"FLM1" + struct.pack("<II", 1, 2) + payload)
    with pytest.raises(NonFiniteValueError, match="byte 16"):
        read_logits(path)


def test_flm_width_mismatch(tmp_path):
    path = tmp_path / "w.flm"
    path.write_bytes(GOLDEN_1X2)
    with pytest.raises(WidthMismatchError, match="inventory has 3"):
        read_logits(path, expected_n_phones=3)


def test_flm_zero_frames_rejected(tmp_path):
    path = tmp_path / "z.flm"
    path.write_bytes(b"FLM1" + struct.pack("<II", 0, 2))
    with pytest.raises(FormatError, match="zero frames"):
        read_logits(path)


# --- inventory ----------------------------------------------------------------


def test_inventory_roundtrip(tmp_path):
    path = tmp_path / "inv.tsv"
    inv = PhoneInventory.from_labels(["a", "b", "sil"], skip_labels=["sil"])
    write_inventory(inv, path)
    back = read_inventory(path)
    assert back.labels == ("a", "b", "sil")
    assert back.skip_labels == {"sil"}


def test_inventory_skip_directive(tmp_path):
    path = tmp_path / "inv.tsv"
    path.write_text("#skip: b\na\nb\nc\n")
    inv = read_inventory(path)
    assert inv.skip_labels == {"b"}


def test_inventory_default_skips_apply(tmp_path):
    path = tmp_path / "inv.tsv"
    path.write_text("a\nsil\nb\n")
    assert read_inventory(path).skip_labels == {"sil"}


def test_inventory_duplicate_label(tmp_path):
    path = tmp_path / "inv.tsv"
    path.write_text("a\nb\na\n")
    with pytest.raises(FormatError, match="line 3"):
        read_inventory(path)


# --- alignments ---------------------------------------------------------------


def test_alignments_parse(tmp_path, inventory):
    path = tmp_path / "ali.tsv"
    path.write_text("# comment\nu1\ta\t0\t2\nu1\tb\t2\t3\n\nu2\tc\t0\t1\n")
    alignments = read_alignments(path, inventory)
    assert [a.utterance_id for a in alignments] == ["u1", "u2"]
    assert alignments[0].segments[0] == PhoneSegment(0, 0, 2)
    assert alignments[0].segments[1] == PhoneSegment(1, 2, 3)


def test_alignments_unknown_label_line_number(tmp_path, inventory):
    path = tmp_path / "ali.tsv"
    path.write_text("u1\tz\t0\t2\n")
    with pytest.raises(UnknownLabelError, match="line 1"):
        read_alignments(path, inventory)


def test_alignments_empty_segment(tmp_path, inventory):
    path = tmp_path / "ali.tsv"
    path.write_text("u1\ta\t2\t2\n")
    with pytest.raises(FormatError, match="empty segment"):
        read_alignments(path, inventory)


def test_alignments_overlap_detected(tmp_path, inventory):
    path = tmp_path / "ali.tsv"
    path.write_text("u1\ta\t0\t3\nu1\tb\t2\t4\n")
    with pytest.raises(FormatError, match="line 2"):
        read_alignments(path, inventory)


def test_alignments_field_count(tmp_path, inventory):
    path = tmp_path / "ali.tsv"
    path.write_text("u1\ta\t0\n")
    with pytest.raises(FormatError, match="4 tab-separated"):
        read_alignments(path, inventory)


def test_alignments_non_integer_bounds(tmp_path, inventory):
    path = tmp_path / "ali.tsv"
    path.write_text("u1\ta\t0.5\t2\n")
    with pytest.raises(FormatError, match="integers"):
        read_alignments(path, inventory)


def test_alignments_roundtrip(tmp_path, inventory):
    alignments = [
        UtteranceAlignment("u1", (PhoneSegment(0, 0, 2), PhoneSegment(2, 2, 5))),
        UtteranceAlignment("u2", (PhoneSegment(1, 0, 1),)),
    ]
    path = tmp_path / "ali.tsv"
    write_alignments(alignments, inventory, path)
    assert read_alignments(path, inventory) == alignments


# --- labels -------------------------------------------------------------------


def test_labels_parse(tmp_path):
    path = tmp_path / "labels.tsv"
    path.write_text("spk1\t2\nu7\t0\n")
    assert read_labels(path) == [SeverityLabel("spk1", 2), SeverityLabel("u7", 0)]


def test_labels_duplicate_key(tmp_path):
    path = tmp_path / "labels.tsv"
    path.write_text("spk1\t2\nspk1\t2\n")
    with pytest.raises(FormatError, match="duplicate"):
        read_labels(path)


def test_labels_negative_severity(tmp_path):
    path = tmp_path / "labels.tsv"
    path.write_text("spk1\t-1\n")
    with pytest.raises(FormatError, match=">= 0"):
        read_labels(path)


def test_labels_non_integer(tmp_path):
    path = tmp_path / "labels.tsv"
    path.write_text("spk1\ttwo\n")
    with pytest.raises(FormatError, match="integer"):
        read_labels(path)


# --- priors -------------------------------------------------------------------


def test_priors_parse(tmp_path, inventory):
    path = tmp_path / "priors.tsv"
    path.write_text("a\t0.5\nb\t0.25\nc\t0.25\n")
    prior = read_priors(path, inventory)
    assert prior.probs == pytest.approx([0.5, 0.25, 0.25], abs=1e-12)


def test_priors_sum_violation(tmp_path, inventory):
    path = tmp_path / "priors.tsv"
    path.write_text("a\t0.25\nb\t0.125\nc\t0.125\n")
    with pytest.raises(FormatError, match="sum"):
        read_priors(path, inventory)


def test_priors_missing_phone(tmp_path, inventory):
    path = tmp_path / "priors.tsv"
    path.write_text("a\t0.5\nb\t0.5\n")
    with pytest.raises(FormatError, match="missing"):
        read_priors(path, inventory)


def test_priors_zero_entry(tmp_path, inventory):
    path = tmp_path / "priors.tsv"
    path.write_text("a\t1.0\nb\t0.0\nc\t0.0\n")
    with pytest.raises(FormatError, match="> 0"):
        read_priors(path, inventory)


def test_priors_renormalized_within_tolerance(tmp_path, inventory):
    path = tmp_path / "priors.tsv"
    path.write_text("a\t0.5000001\nb\t0.25\nc\t0.25\n")
    prior = read_priors(path, inventory)
    assert prior.probs.sum() == pytest.approx(1.0, abs=1e-12)


def test_priors_roundtrip(tmp_path, inventory):
    prior = PhonePrior(np.array([0.6, 0.25, 0.15]))
    path = tmp_path / "priors.tsv"
    write_priors(prior, inventory, path)
    assert np.array_equal(read_priors(path, inventory).probs, prior.probs)


# --- prior estimation ----------------------------------------------------------


def test_estimate_priors_add_one_over_frames():
    inv = PhoneInventory.from_labels(["a", "b"])
    alignments = [
        UtteranceAlignment("u1", (PhoneSegment(0, 0, 2), PhoneSegment(1, 2, 3)))
    ]
    prior = estimate_priors(alignments, inv)
    assert prior.probs == pytest.approx([0.6, 0.4], abs=1e-15)


def test_estimate_priors_unused_phone_positive():
    inv = PhoneInventory.from_labels(["a", "b", "c"])
    alignments = [
        UtteranceAlignment("u1", (PhoneSegment(0, 0, 2), PhoneSegment(1, 2, 3)))
    ]
    prior = estimate_priors(alignments, inv)
    assert prior.probs[2] == pytest.approx(1 / 6, abs=1e-15)
    assert np.all(prior.probs > 0)


def test_estimate_priors_all_skip_is_error():
    inv = PhoneInventory.from_labels(["a", "sil"])
    alignments = [UtteranceAlignment("u1", (PhoneSegment(1, 0, 3),))]
    with pytest.raises(DataError, match="no scorable"):
        estimate_priors(alignments, inv)


def test_estimate_priors_segment_mode():
    inv = PhoneInventory.from_labels(["a", "b"])
    alignments = [
        UtteranceAlignment("u1", (PhoneSegment(0, 0, 10), PhoneSegment(1, 10, 11)))
    ]
    prior = estimate_priors(alignments, inv, mode="segments")
    assert prior.probs == pytest.approx([0.5, 0.5], abs=1e-15)


# --- manifest and corpus --------------------------------------------------------


def _write_corpus(tmp_path, with_labels=True, speaker=None):
    inv = PhoneInventory.from_labels(["a", "b", "sil"], skip_labels=["sil"])
    write_inventory(inv, tmp_path / "inventory.tsv")
    alignments = [
        UtteranceAlignment("u1", (PhoneSegment(0, 0, 2), PhoneSegment(1, 2, 3)))
    ]
    write_alignments(alignments, inv, tmp_path / "alignments.tsv")
    (tmp_path / "logits").mkdir()
    matrix = FrameLogitMatrix("u1", np.array([[2.0, 1.0, 0.0]] * 3))
    write_logits(matrix, tmp_path / "logits" / "u1.flm")
    if with_labels:
        key = speaker if speaker else "u1"
        write_labels([SeverityLabel(key, 2)], tmp_path / "labels.tsv")
    write_manifest(
        tmp_path / "manifest.json",
        inventory_path="inventory.tsv",
        alignments_path="alignments.tsv",
        utterances={"u1": UtteranceEntry("logits/u1.flm", speaker=speaker)},
        labels_path="labels.tsv" if with_labels else None,
    )
    return tmp_path / "manifest.json"


def test_manifest_roundtrip(tmp_path):
    path = _write_corpus(tmp_path)
    manifest = read_manifest(path)
    assert manifest.inventory_path == "inventory.tsv"
    assert manifest.utterances["u1"].logits_path == "logits/u1.flm"


def test_manifest_missing_key(tmp_path):
    path = tmp_path / "manifest.json"
    path.write_text(json.dumps({"inventory": "x"}))
    with pytest.raises(FormatError, match="alignments"):
        read_manifest(path)


def test_manifest_invalid_json(tmp_path):
    path = tmp_path / "manifest.json"
    path.write_text("{nope")
    with pytest.raises(FormatError, match="JSON"):
        read_manifest(path)


def test_load_corpus(tmp_path):
    corpus = load_corpus(_write_corpus(tmp_path))
    assert set(corpus.matrices) == {"u1"}
    assert corpus.severity_by_utterance == {"u1": 2}
    assert corpus.prior.probs.sum() == pytest.approx(1.0, abs=1e-12)
    assert len(corpus.manifest_digest) == 64


def test_load_corpus_speaker_expansion(tmp_path):
    corpus = load_corpus(_write_corpus(tmp_path, speaker="spk9"))
    assert corpus.severity_by_utterance == {"u1": 2}


def test_load_corpus_requires_labels(tmp_path):
    path = _write_corpus(tmp_path, with_labels=False)
    with pytest.raises(DataError, match="labels"):
        load_corpus(path, require_labels=True)
    load_corpus(path)  # fine without the requirement


def test_load_corpus_alignment_beyond_matrix(tmp_path):
    path = _write_corpus(tmp_path)
    (tmp_path / "alignments.tsv").write_text("u1\ta\t0\t9\n")
    with pytest.raises(DataError, match="frame 9"):
        load_corpus(path)


def test_load_corpus_missing_logit_entry(tmp_path):
    path = _write_corpus(tmp_path)
    (tmp_path / "alignments.tsv").write_text("u1\ta\t0\t2\nu9\ta\t0\t1\n")
    with pytest.raises(DataError, match="u9"):
        load_corpus(path)


# --- report --------------------------------------------------------------------


def _tiny_report():
    cells = (
        MethodCell(
            GopMethod(Normalization.NONE, Scoring.GMM),
            tau=-0.25,
            n_items=10,
            n_pairs=45,
        ),
        MethodCell(
            GopMethod(Normalization.PRIOR, Scoring.MAXLOGIT),
            tau=-0.5,
            n_items=10,
            n_pairs=45,
        ),
        MethodCell(
            GopMethod(Normalization.NONE, Scoring.ENTROPY),
            tau=None,
            n_items=10,
            n_pairs=45,
            error="undefined-correlation: all x values tied; tau undefined",
        ),
    )
    return EvaluationReport(manifest_digest="f" * 64, cells=cells)


def test_report_renders_deterministically():
    a = render_report(_tiny_report())
    b = render_report(_tiny_report())
    assert a == b
    assert "[methods]" in a
    assert "[phonemes]" in a
    assert "[skipped_phones]" in a


def test_report_orders_baselines_first():
    text = render_report(_tiny_report())
    lines = [l for l in text.splitlines() if l.startswith(("none\t", "prior\t"))]
    assert lines[0].startswith("none\tgmm")
    assert lines[1].startswith("none\tentropy")
    assert lines[2].startswith("prior\tmaxlogit")


def test_report_parse_methods_roundtrip():
    taus = parse_report_methods(render_report(_tiny_report()))
    assert taus["none:gmm"] == -0.25
    assert taus["prior:maxlogit"] == -0.5
    assert math.isnan(taus["none:entropy"])


def test_report_empty_phoneme_section_present():
    text = render_report(_tiny_report())
    idx = text.index("[phonemes]")
    nxt = text.index("[", idx + 1)
    section = text[idx:nxt].strip().splitlines()
    assert section == ["[phonemes]", "phone\ttau\tabs_tau\tn_segments"]
