"""Pronunciation scoring from frame-wise phone logits.

The package computes per-segment goodness-of-pronunciation scores under a
grid of methods (classic averaged-log-probability baselines plus
uncertainty-style scores, composed with logit normalizations), averages
them per utterance, and evaluates any method against ordinal
intelligibility ratings with tie-corrected Kendall rank correlation.
"""

__version__ = "0.1.0"

from .core import (  # noqa: E402
    DEFAULT_SKIP_LABELS,
    FrameLogitMatrix,
    GopMethod,
    Normalization,
    PhoneInventory,
    PhonePrior,
    PhoneSegment,
    Scoring,
    SeverityLabel,
    UtteranceAlignment,
    default_method_grid,
    expand_labels,
)
from .errors import (  # noqa: E402
    ConfigError,
    DataError,
    FormatError,
    GopError,
    UndefinedCorrelationError,
    UnknownLabelError,
    UsageError,
)
from .posterior import SegmentStats, log_softmax, normalize_logits, segment_stats  # noqa: E402
from .scores import (  # noqa: E402
    LOG_FLOOR,
    SegmentScore,
    score_dnn,
    score_entropy,
    score_entropy_literal,
    score_gmm,
    score_logitmargin,
    score_margin,
    score_maxlogit,
    score_nn,
    score_segment,
)
from .stats import (  # noqa: E402
    CorrelationResult,
    MethodEvaluation,
    PhonemeCorrelation,
    SkippedPhone,
    UtteranceScore,
    aggregate_utterance,
    evaluate_method,
    kendall_tau_b,
    phoneme_correlations,
    top_k_phonemes,
)
from .synthetic import SplitMix64, SyntheticConfig, SyntheticCorpus, generate_synthetic  # noqa: E402
from .formats import (  # noqa: E402
    Corpus,
    CorpusManifest,
    EvaluationReport,
    MethodCell,
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
    write_report,
)
from .pipeline import (  # noqa: E402
    ScoreRun,
    best_cell,
    build_report,
    calibrate_temperature,
    evaluate_grid,
    score_corpus,
)
