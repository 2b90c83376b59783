"""newscap: benchmark harness and metrics for news-video caption evaluation."""

from .corpus import (
    AlignmentReport,
    CaptionRecord,
    ClipRecord,
    CorpusStats,
    TagDictionary,
    descriptive_stats,
    filter_clips,
    load_captions,
    load_manifest,
    load_tag_dictionary,
    translate_tags,
    validate_alignment,
)
from .embedding import (
    BertScoreResult,
    MrrTable,
    ShuffleTestResult,
    bert_score,
    clip_score,
    cosine,
    mrr,
    shuffled_pairs_test,
    text_similarity,
)
from .fidelity import (
    EXCLUDED,
    EfsResult,
    EntityMatchConfig,
    ThemeClassifierConfig,
    classify_themes,
    efs,
    extract_entities,
    match_entities,
    tfs,
    theme_labels,
    token_ratio,
)
from .harness import Cell, Leaderboard, RunConfig, ScoreTable, aggregate, evaluate
from .lexical import (
    MatchResources,
    MeteorResult,
    RougeLResult,
    TokenSequence,
    lcs_length,
    meteor,
    rouge_l,
    tokenize,
)
from .report import report

__version__ = "0.1.0"
