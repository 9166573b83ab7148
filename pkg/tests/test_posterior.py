import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gopeval import (
    ConfigError,
    DataError,
    FrameLogitMatrix,
    GopMethod,
    Normalization,
    PhonePrior,
    PhoneSegment,
    Scoring,
    log_softmax,
    normalize_logits,
    segment_stats,
)

NONE_MAXLOGIT = GopMethod(Normalization.NONE, Scoring.MAXLOGIT)

finite_logits = st.lists(
    st.floats(min_value=-30, max_value=30), min_size=2, max_size=6
)


def test_log_softmax_uniform():
    out = log_softmax(np.zeros(3))
    assert out == pytest.approx([-math.log(3)] * 3, abs=1e-12)


def test_log_softmax_known_values():
    # frozen from a 50-digit decimal evaluation of log(e^x / sum e^q)
    out = log_softmax(np.array([2.0, 1.0, 0.0]))
    expected = [-0.4076059644443803, -1.4076059644443804, -2.40760596444438]
    assert out == pytest.approx(expected, abs=1e-12)


def test_log_softmax_no_overflow():
    out = log_softmax(np.array([1000.0, 0.0, 0.0]))
    assert np.all(np.isfinite(out))
    assert out[0] == pytest.approx(0.0, abs=1e-12)
    assert out[1] == pytest.approx(-1000.0, abs=1e-9)


def test_log_softmax_rejects_nan():
    with pytest.raises(DataError):
        log_softmax(np.array([0.0, np.nan]))


@given(finite_logits)
@settings(max_examples=200)
def test_log_softmax_exp_sums_to_one(logits):
    out = log_softmax(np.array(logits))
    assert abs(np.exp(out).sum() - 1.0) < 1e-12


@given(finite_logits, st.floats(min_value=-50, max_value=50))
@settings(max_examples=200)
def test_softmax_shift_invariance(logits, shift):
    base = np.exp(log_softmax(np.array(logits)))
    shifted = np.exp(log_softmax(np.array(logits) + shift))
    assert np.abs(base - shifted).max() < 1e-12


def test_normalize_identity():
    m = GopMethod(Normalization.NONE, Scoring.GMM)
    out = normalize_logits(np.array([2.0, 1.0, 0.0]), m)
    assert list(out) == [2.0, 1.0, 0.0]


def test_normalize_scale():
    m = GopMethod(Normalization.SCALE, Scoring.ENTROPY, temperature=2.0)
    out = normalize_logits(np.array([2.0, 1.0, 0.0]), m)
    assert list(out) == [1.0, 0.5, 0.0]


def test_normalize_scale_t1_equals_identity():
    m = GopMethod(Normalization.SCALE, Scoring.ENTROPY, temperature=1.0)
    logits = np.array([3.7, -1.2, 0.05])
    assert list(normalize_logits(logits, m)) == list(logits)


def test_normalize_prior(half_quarter_prior):
    m = GopMethod(Normalization.PRIOR, Scoring.MAXLOGIT)
    out = normalize_logits(np.array([2.0, 1.0, 0.0]), m, half_quarter_prior)
    expected = [
        2.0 - math.log(0.5),
        1.0 - math.log(0.25),
        0.0 - math.log(0.25),
    ]
    assert out == pytest.approx(expected, abs=1e-12)
    assert out == pytest.approx([2.69315, 2.38629, 1.38629], abs=1e-5)


def test_normalize_prior_requires_prior():
    m = GopMethod(Normalization.PRIOR, Scoring.MAXLOGIT)
    with pytest.raises(ConfigError):
        normalize_logits(np.array([1.0, 2.0]), m)


def test_normalize_prior_length_mismatch(half_quarter_prior):
    m = GopMethod(Normalization.PRIOR, Scoring.MAXLOGIT)
    with pytest.raises(DataError):
        normalize_logits(np.array([1.0, 2.0]), m, half_quarter_prior)


def test_segment_stats_two_frames(two_frame_matrix):
    stats = segment_stats(two_frame_matrix, PhoneSegment(0, 0, 2), NONE_MAXLOGIT)
    assert stats.n_frames == 2
    assert stats.mean_logit == pytest.approx([1.0, 1.0, 1.0], abs=1e-15)
    expected_prob = [0.3776357644726012, 0.24472847105479767, 0.3776357644726012]
    assert stats.mean_prob == pytest.approx(expected_prob, abs=1e-12)


def test_segment_stats_single_uniform_frame():
    matrix = FrameLogitMatrix("u1", np.zeros((1, 3)))
    stats = segment_stats(matrix, PhoneSegment(0, 0, 1), NONE_MAXLOGIT)
    assert stats.mean_prob == pytest.approx([1 / 3] * 3, abs=1e-15)
    assert list(stats.mean_logit) == [0.0, 0.0, 0.0]


def test_uniform_prior_matches_identity_probs():
    matrix = FrameLogitMatrix("u1", np.array([[2.0, 1.0, 0.0]]))
    seg = PhoneSegment(0, 0, 1)
    plain = segment_stats(matrix, seg, NONE_MAXLOGIT)
    uniform = PhonePrior(np.full(3, 1 / 3))
    prior_m = GopMethod(Normalization.PRIOR, Scoring.MAXLOGIT)
    shifted = segment_stats(matrix, seg, prior_m, uniform)
    assert np.abs(plain.mean_prob - shifted.mean_prob).max() < 1e-12


def test_segment_stats_range_validation(two_frame_matrix):
    with pytest.raises(DataError, match="exceed"):
        segment_stats(two_frame_matrix, PhoneSegment(0, 1, 3), NONE_MAXLOGIT)


@given(
    st.lists(
        st.lists(st.floats(min_value=-20, max_value=20), min_size=3, max_size=3),
        min_size=1,
        max_size=6,
    )
)
@settings(max_examples=100)
def test_mean_prob_is_convex_combination(rows):
    matrix = FrameLogitMatrix("u", np.array(rows))
    stats = segment_stats(
        matrix, PhoneSegment(0, 0, len(rows)), NONE_MAXLOGIT
    )
    per_frame = np.array(
        [np.exp(log_softmax(np.array(r))) for r in rows]
    )
    lo = per_frame.min(axis=0) - 1e-12
    hi = per_frame.max(axis=0) + 1e-12
    assert np.all(stats.mean_prob >= lo)
    assert np.all(stats.mean_prob <= hi)


@given(finite_logits, st.floats(min_value=0.1, max_value=10))
@settings(max_examples=200)
def test_scaling_preserves_argmax(logits, temperature):
    m = GopMethod(Normalization.SCALE, Scoring.ENTROPY, temperature=temperature)
    arr = np.array(logits)
    scaled = normalize_logits(arr, m)
    assert int(np.argmax(scaled)) == int(np.argmax(arr))
