import pytest
from hypothesis import given
from hypothesis import strategies as st

import numpy as np

from gopeval import (
    ConfigError,
    DataError,
    FrameLogitMatrix,
    GopMethod,
    Normalization,
    PhoneInventory,
    PhonePrior,
    PhoneSegment,
    Scoring,
    SeverityLabel,
    UnknownLabelError,
    UsageError,
    UtteranceAlignment,
    default_method_grid,
    expand_labels,
)


def test_index_of_ordered_lookup(inventory):
    assert inventory.index_of("b") == 1
    assert inventory.index_of("a") == 0


def test_index_of_unknown_label(inventory):
    with pytest.raises(UnknownLabelError, match="'z'"):
        inventory.index_of("z")


def test_index_of_error_carries_context(inventory):
    with pytest.raises(UnknownLabelError, match="u17"):
        inventory.index_of("z", context="u17")


@given(st.lists(st.text(min_size=1, max_size=4), min_size=2, unique=True))
def test_index_roundtrip(labels):
    inv = PhoneInventory.from_labels(labels, skip_labels=())
    for label in labels:
        assert inv.label_of(inv.index_of(label)) == label


def test_inventory_rejects_duplicates():
    with pytest.raises(DataError, match="duplicate"):
        PhoneInventory.from_labels(["a", "b", "a"])


def test_inventory_needs_two_phones():
    with pytest.raises(DataError):
        PhoneInventory.from_labels(["a"])


def test_inventory_skip_must_be_subset():
    with pytest.raises(DataError, match="skip"):
        PhoneInventory(labels=("a", "b"), skip_labels=frozenset({"z"}))


def test_inventory_default_skips():
    inv = PhoneInventory.from_labels(["a", "sil", "sp"])
    assert inv.skip_labels == {"sil", "sp"}
    assert inv.scorable_indices() == (0,)


def test_matrix_rejects_nan():
    with pytest.raises(DataError, match="non-finite"):
        FrameLogitMatrix("u1", np.array([[0.0, np.nan]]))


def test_matrix_rejects_empty():
    with pytest.raises(DataError):
        FrameLogitMatrix("u1", np.zeros((0, 3)))


def test_matrix_width_check(inventory):
    matrix = FrameLogitMatrix("u1", np.zeros((1, 4)))
    with pytest.raises(DataError, match="4 phone columns"):
        matrix.check_width(inventory)
    FrameLogitMatrix("u1", np.zeros((1, 3))).check_width(inventory)


def test_matrix_is_immutable(two_frame_matrix):
    with pytest.raises(ValueError):
        two_frame_matrix.values[0, 0] = 9.0


def test_segment_rejects_empty_range():
    with pytest.raises(DataError, match="empty segment"):
        PhoneSegment(0, 2, 2)
    with pytest.raises(DataError):
        PhoneSegment(0, 3, 1)


def test_segment_frame_count():
    assert PhoneSegment(1, 3, 7).n_frames == 4


def test_alignment_rejects_overlap():
    with pytest.raises(DataError, match="overlap"):
        UtteranceAlignment(
            "u1", (PhoneSegment(0, 0, 3), PhoneSegment(1, 2, 4))
        )


def test_alignment_rejects_unsorted():
    with pytest.raises(DataError):
        UtteranceAlignment(
            "u1", (PhoneSegment(0, 4, 6), PhoneSegment(1, 0, 2))
        )


def test_alignment_scorable_segments(inventory_with_sil):
    alignment = UtteranceAlignment(
        "u1", (PhoneSegment(3, 0, 2), PhoneSegment(0, 2, 4))
    )
    scorable = alignment.scorable_segments(inventory_with_sil)
    assert [s.phone for s in scorable] == [0]


def test_prior_rejects_zero_entry():
    with pytest.raises(DataError, match="positive"):
        PhonePrior(np.array([1.0, 0.0]))


def test_prior_rejects_bad_sum():
    with pytest.raises(DataError, match="sums to"):
        PhonePrior(np.array([0.5, 0.4]))


def test_severity_label_rejects_negative():
    with pytest.raises(DataError):
        SeverityLabel("spk1", -1)


def test_method_parse():
    m = GopMethod.parse("prior:maxlogit")
    assert m.normalization is Normalization.PRIOR
    assert m.scoring is Scoring.MAXLOGIT
    assert m.temperature is None
    assert m.label == "prior:maxlogit"


def test_method_parse_scale_requires_temperature():
    with pytest.raises(UsageError, match="temperature"):
        GopMethod.parse("scale:entropy")
    m = GopMethod.parse("scale:entropy", temperature=2.0)
    assert m.temperature == 2.0
    assert m.label == "scale:entropy@T=2"


def test_method_parse_unknown_names():
    with pytest.raises(UsageError, match="normalization"):
        GopMethod.parse("bogus:entropy")
    with pytest.raises(UsageError, match="scoring"):
        GopMethod.parse("none:bogus")
    with pytest.raises(UsageError):
        GopMethod.parse("maxlogit")


def test_method_temperature_must_be_positive():
    with pytest.raises(ConfigError):
        GopMethod(Normalization.SCALE, Scoring.ENTROPY, temperature=0.0)
    with pytest.raises(ConfigError):
        GopMethod(Normalization.SCALE, Scoring.ENTROPY, temperature=-1.0)


def test_method_temperature_only_with_scale():
    with pytest.raises(ConfigError):
        GopMethod(Normalization.NONE, Scoring.ENTROPY, temperature=2.0)


def test_dnn_only_composes_with_none():
    with pytest.raises(ConfigError, match="dnn"):
        GopMethod(Normalization.PRIOR, Scoring.DNN)
    with pytest.raises(ConfigError):
        GopMethod(Normalization.SCALE, Scoring.DNN, temperature=2.0)
    GopMethod(Normalization.NONE, Scoring.DNN)


def test_needs_prior():
    assert GopMethod(Normalization.NONE, Scoring.DNN).needs_prior
    assert GopMethod(Normalization.PRIOR, Scoring.ENTROPY).needs_prior
    assert not GopMethod(Normalization.NONE, Scoring.GMM).needs_prior


def test_default_grid_is_fifteen_cells_in_canonical_order():
    grid = default_method_grid(temperature=2.0)
    assert len(grid) == 15
    labels = [m.label for m in grid]
    assert labels[:3] == ["none:gmm", "none:nn", "none:dnn"]
    assert labels[3:7] == [
        "none:entropy",
        "none:margin",
        "none:maxlogit",
        "none:logitmargin",
    ]
    assert labels[7] == "scale:entropy@T=2"
    assert labels[11:] == [
        "prior:entropy",
        "prior:margin",
        "prior:maxlogit",
        "prior:logitmargin",
    ]
    assert len(set(grid)) == 15


def test_default_grid_requires_temperature():
    with pytest.raises(ConfigError):
        default_method_grid()


def test_expand_labels_prefers_utterance_key():
    labels = [SeverityLabel("spk1", 3), SeverityLabel("u2", 1)]
    speaker_of = {"u1": "spk1", "u2": "spk1", "u3": None}
    resolved = expand_labels(labels, speaker_of, ["u1", "u2", "u3"])
    assert resolved == {"u1": 3, "u2": 1}


def test_expand_labels_conflicting_keys():
    with pytest.raises(DataError, match="conflicting"):
        expand_labels(
            [SeverityLabel("k", 1), SeverityLabel("k", 2)], {}, []
        )
