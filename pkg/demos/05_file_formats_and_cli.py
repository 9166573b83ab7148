"""The on-disk artifacts and the batch CLI, end to end.

Writes a synthetic corpus with the `synth` subcommand, pokes at the
binary logit format, then runs `priors`, `evaluate`, `phoneme-corr` and
`calibrate` on it. Everything lands in a temp directory.
"""

import tempfile
from pathlib import Path

from gopeval.cli import main
from gopeval.formats import read_logits

root = Path(tempfile.mkdtemp(prefix="gopeval-demo-"))
corpus = root / "corpus"

print("== synth ==")
main(["synth", "--out", str(corpus), "--seed", "42", "--n-utterances", "50"])

flm = sorted((corpus / "logits").iterdir())[0]
header = flm.read_bytes()[:12]
print(f"\nfirst logit file: {flm.name}")
print("magic + header bytes:", header.hex(" "))
matrix = read_logits(flm)
print("decoded shape:", matrix.values.shape)

print("\n== priors ==")
main(["priors", "--manifest", str(corpus / "manifest.json"),
      "--out", str(root / "priors_estimated.tsv")])

print("\n== evaluate ==")
main(["evaluate", "--manifest", str(corpus / "manifest.json"),
      "--temperature", "2.0", "--out", str(root / "report.txt")])

print("\n== phoneme-corr ==")
main(["phoneme-corr", "--manifest", str(corpus / "manifest.json"),
      "--method", "prior:maxlogit", "--top-k", "3",
      "--out", str(root / "phonemes.txt")])

print("\n== calibrate ==")
main(["calibrate", "--manifest", str(corpus / "manifest.json"),
      "--grid", "0.5,1,2,4"])

print(f"\nartifacts left in {root} for inspection")
print((root / "report.txt").read_text().splitlines()[0])
