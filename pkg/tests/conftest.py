import numpy as np
import pytest

from gopeval import (
    FrameLogitMatrix,
    GopMethod,
    Normalization,
    PhoneInventory,
    PhonePrior,
    PhoneSegment,
    Scoring,
    segment_stats,
)


@pytest.fixture
def inventory():
    return PhoneInventory.from_labels(["a", "b", "c"])


@pytest.fixture
def inventory_with_sil():
    return PhoneInventory.from_labels(["a", "b", "c", "sil"])


@pytest.fixture
def two_frame_matrix():
    # softmax means of these two rows are [0.37763..., 0.24472..., 0.37763...]
    return FrameLogitMatrix("u1", np.array([[2.0, 1.0, 0.0], [0.0, 1.0, 2.0]]))


@pytest.fixture
def two_frame_stats(two_frame_matrix):
    method = GopMethod(Normalization.NONE, Scoring.MAXLOGIT)
    return segment_stats(two_frame_matrix, PhoneSegment(0, 0, 2), method)


@pytest.fixture
def half_quarter_prior():
    return PhonePrior(np.array([0.5, 0.25, 0.25]))
