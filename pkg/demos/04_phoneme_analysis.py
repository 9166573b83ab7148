"""Per-phoneme correlation: which phone carries the severity signal?

The corpus here degrades only phone p00 with severity; everything else
is noise. Pairing each segment's score with its utterance's severity
and computing tau-b per phone singles out p00 immediately.
"""

from gopeval import (
    GopMethod,
    SyntheticConfig,
    generate_synthetic,
    phoneme_correlations,
    score_corpus,
    top_k_phonemes,
)
from gopeval.formats import Corpus

config = SyntheticConfig(
    n_utterances=150, seed=42, degrading_phones=frozenset({0})
)
synthetic = generate_synthetic(config)
corpus = Corpus(
    inventory=synthetic.inventory,
    matrices={m.utterance_id: m for m in synthetic.matrices},
    alignments=synthetic.alignments,
    severity_by_utterance={l.key: l.severity for l in synthetic.labels},
    prior=synthetic.prior,
    manifest_digest="-",
)

run = score_corpus(corpus, GopMethod.parse("prior:maxlogit"))
correlations, skipped = phoneme_correlations(
    run.segment_scores, corpus.severity_by_utterance, min_support=10
)

print(f"{'phone':<8} {'tau':>9}   segments")
for c in correlations:
    label = corpus.inventory.label_of(c.phone)
    print(f"{label:<8} {c.tau:>9.4f}   {c.n_segments}")
if skipped:
    print("skipped:", [(corpus.inventory.label_of(s.phone), s.reason) for s in skipped])

print()
top = top_k_phonemes(correlations, 3, corpus.inventory)
print("top-3 most negative:", [corpus.inventory.label_of(c.phone) for c in top])
