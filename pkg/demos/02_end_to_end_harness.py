"""End-to-end harness run on a tiny synthetic corpus: evaluate, aggregate,
and render a markdown leaderboard.

Run: python3 demos/02_end_to_end_harness.py
"""

import tempfile
from pathlib import Path

from newscap.backends import (
    GazetteerEntityExtractor,
    HashStubNliScorer,
    HashStubSentenceEmbedder,
    HashStubTokenEmbedder,
)
from newscap.corpus import CaptionRecord, ClipRecord
from newscap.harness import RunConfig, aggregate, evaluate
from newscap.report import report

clips = [
    ClipRecord(
        clip_id=f"clip-{i}",
        duration_s=40 + 10 * i,
        title=f"bulletin {i}",
        reference_description=f"Report {i}: the minister visited London for talks",
        source_dataset="BBC",
    )
    for i in range(4)
]
captions = [
    CaptionRecord(c.clip_id, model, f"{model} summary of report {i} about London")
    for i, c in enumerate(clips)
    for model in ("model-alpha", "model-beta")
]

config = RunConfig(
    metrics=("rougeL", "meteor", "textsim", "bertscore", "tfs", "efs"),
    backends={
        "sentence": HashStubSentenceEmbedder(dim=64, seed=7),
        "tokens": HashStubTokenEmbedder(dim=32, seed=7),
        "nli": HashStubNliScorer(seed=7),
        "ner": GazetteerEntityExtractor({"london": "GPE", "minister": "PERSON"}),
    },
    workers=2,
)

table = evaluate(clips, captions, config)
board = aggregate(table)

print(f"config fingerprint: {table.provenance['config_hash']}")
print(f"cells computed: {len(table.cells)}\n")
for metric, rows in sorted(board.per_metric.items()):
    top = rows[0]
    print(f"{metric:10s} best={top.model_id}  mean={top.mean:.4f}")

out_dir = Path(tempfile.mkdtemp(prefix="newscap-demo-"))
paths = report(board, table, "markdown", out_dir)
print(f"\nmarkdown leaderboard written to {paths[0]}:\n")
print(paths[0].read_text())
