"""Audio -> frame-level phone logits, in the scoring engine's file formats."""

__version__ = "0.1.0"

from .alignments import (
    AlignmentError,
    FrameInterval,
    convert_intervals,
    read_ctm,
    read_textgrid,
    seconds_to_frames,
)
from .audio import AudioError, read_audio, read_wav, resample_linear
from .extract import ExtractionJob, ExtractionResult, extract_logits
from .model import (
    ARPABET_LABELS,
    DEFAULT_MODEL,
    FilterbankLinearClassifier,
    ModelError,
    Wav2Vec2FrameClassifier,
    resolve_model,
)
