"""Reference-free question-generation evaluation toolkit.

Scores candidate questions on naturalness, answerability, and complexity via
an LLM chain-of-thought QA pass, alongside reference-based baselines (BLEU-4,
ROUGE-L), external-score ingestion, and correlation analysis against human
ratings.
"""

from .core import CandidateQuestion, QGExample, TokenBag, normalize_text, token_f1
from .scoring import (
    CalibrationProfile,
    CriterionScores,
    ScoreConfig,
    calibrate_expected_complexity,
    complexity_similarity,
    naco_aggregate,
    score_candidate,
)

__version__ = "0.1.0"

__all__ = [
    "CalibrationProfile",
    "CandidateQuestion",
    "CriterionScores",
    "QGExample",
    "ScoreConfig",
    "TokenBag",
    "calibrate_expected_complexity",
    "complexity_similarity",
    "naco_aggregate",
    "normalize_text",
    "score_candidate",
    "token_f1",
    "__version__",
]
