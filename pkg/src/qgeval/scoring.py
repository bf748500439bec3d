"""Criterion scores and the hierarchical weighted composite.

One candidate question earns three criterion scores from a chain-of-thought
QA trace: a binary naturalness flag, a token-F1 answerability score against
the gold answer, and a complexity similarity comparing the trace's step count
to the dataset's expected step count (the mode over a reference sample). The
composite is a weighted sum gated to 0 when naturalness or answerability is 0.
Per-candidate scoring averages over multiple independent runs.
"""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from statistics import fmean
from typing import Iterable, Sequence

from .core import CandidateQuestion, QGExample, token_f1
from .llm_gateway import CompletionRequest, Gateway, ModelConfig
from .prompts import COT_QA_TEMPLATE_VERSION, PromptMode, PromptRequest, build_cot_qa_prompt
from .trace_parser import CoTTrace, ParseDegraded, Verdict, count_reasoning_steps, parse_cot_response

# Re-queries after a degraded parse draw a fresh sample without colliding with
# the regular run_index space.
REQUERY_RUN_OFFSET = 10_000


class NoUsableTraces(ValueError):
    """Calibration received no OK trace with a countable step block."""


@dataclass(frozen=True)
class ScoreConfig:
    weights: tuple[float, float, float] = (1 / 3, 1 / 3, 1 / 3)  # (w_n, w_a, w_c)
    runs: int = 3
    display_scale: str = "unit"  # or "percent"
    hierarchy: str = "or"  # gate to 0 when n=0 OR a=0; "and" requires both
    run_aggregation: str = "mean_of_final"  # or "aggregate_of_means"
    requery_degraded: bool = False

    def __post_init__(self) -> None:
        if len(self.weights) != 3 or any(w < 0 for w in self.weights):
            raise ValueError("weights must be three non-negative reals")
        if abs(sum(self.weights) - 1.0) > 1e-9:
            raise ValueError("weights must sum to 1")
        if self.runs < 1:
            raise ValueError("runs must be >= 1")
        if self.display_scale not in ("unit", "percent"):
            raise ValueError("display_scale must be 'unit' or 'percent'")
        if self.hierarchy not in ("or", "and"):
            raise ValueError("hierarchy must be 'or' or 'and'")
        if self.run_aggregation not in ("mean_of_final", "aggregate_of_means"):
            raise ValueError("run_aggregation must be 'mean_of_final' or 'aggregate_of_means'")


@dataclass(frozen=True)
class CalibrationProfile:
    """Dataset-level expected complexity: the mode of reference step counts."""

    dataset_id: str
    expected_complexity: int
    sample_size: int
    histogram: dict[int, int]
    prompt_template_version: str = ""
    model_name: str = ""

    def __post_init__(self) -> None:
        if self.expected_complexity < 1:
            raise ValueError("expected_complexity must be >= 1")
        if self.histogram:
            top = max(self.histogram.values())
            if self.histogram.get(self.expected_complexity) != top:
                raise ValueError("expected_complexity must attain the maximum histogram frequency")

    def save(self, path: str | Path) -> None:
        doc = {
            "dataset_id": self.dataset_id,
            "expected_complexity": self.expected_complexity,
            "sample_size": self.sample_size,
            "histogram": {str(k): v for k, v in sorted(self.histogram.items())},
            "prompt_template_version": self.prompt_template_version,
            "model_name": self.model_name,
        }
        Path(path).write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "CalibrationProfile":
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
        return cls(
            dataset_id=doc["dataset_id"],
            expected_complexity=int(doc["expected_complexity"]),
            sample_size=int(doc["sample_size"]),
            histogram={int(k): int(v) for k, v in doc["histogram"].items()},
            prompt_template_version=doc.get("prompt_template_version", ""),
            model_name=doc.get("model_name", ""),
        )


@dataclass(frozen=True)
class RunScore:
    """Criterion scores from a single run on one candidate."""

    n: int
    a: float
    c_abs: int
    c: float
    naco: float
    degraded: bool = False


@dataclass(frozen=True)
class CriterionScores:
    """Per-candidate scores, averaged over runs. Components are per-run means."""

    n_cand: float
    a_cand: float
    c_cand_abs: int  # rounded mean step count across runs
    c_cand: float
    naco: float
    runs_used: int


def naturalness_score(trace: CoTTrace) -> int:
    """1 when the model accepted the sentence as a natural question, else 0."""
    return 1 if trace.verdict is Verdict.OK else 0


def answerability_score(trace: CoTTrace, gold: str) -> float:
    """Token F1 between the trace's extracted answer and the gold answer; 0 if absent."""
    if trace.answer is None:
        return 0.0
    return token_f1(trace.answer, gold)


def complexity_similarity(c_abs: int, c_expected: int) -> float:
    """Similarity 1 - |c_abs - c_expected| / max(c_abs, c_expected).

    Computed as the algebraically identical min/max ratio, which is exact in
    floating point. Zero parsed steps yield 0.
    """
    if c_expected < 1:
        raise ValueError("c_expected must be >= 1")
    if c_abs < 0:
        raise ValueError("c_abs must be >= 0")
    return min(c_abs, c_expected) / max(c_abs, c_expected)


def naco_aggregate(n: float, a: float, c: float, config: ScoreConfig | None = None) -> float:
    """Weighted composite of the three criteria with hierarchical zeroing.

    The composite is 0 whenever naturalness or answerability is 0 (the "and"
    hierarchy requires both to be 0 instead).
    """
    config = config or ScoreConfig()
    if config.hierarchy == "or":
        gated = n == 0 or a == 0
    else:
        gated = n == 0 and a == 0
    if gated:
        return 0.0
    w_n, w_a, w_c = config.weights
    return w_n * n + w_a * a + w_c * c


def calibrate_expected_complexity(
    reference_traces: Iterable[CoTTrace],
    dataset_id: str,
    prompt_template_version: str = COT_QA_TEMPLATE_VERSION,
    model_name: str = "",
) -> CalibrationProfile:
    """Build a calibration profile from reference-question traces.

    Expected complexity is the mode of step counts over OK traces; ties break
    toward the smaller count. Traces that are non-OK or yielded no countable
    steps carry no complexity signal and are excluded.
    """
    counts = [
        count_reasoning_steps(t)
        for t in reference_traces
        if t.verdict is Verdict.OK and count_reasoning_steps(t) >= 1
    ]
    if not counts:
        raise NoUsableTraces(f"dataset {dataset_id!r}: no usable reference traces")
    histogram = Counter(counts)
    top = max(histogram.values())
    expected = min(k for k, v in histogram.items() if v == top)
    return CalibrationProfile(
        dataset_id=dataset_id,
        expected_complexity=expected,
        sample_size=len(counts),
        histogram=dict(sorted(histogram.items())),
        prompt_template_version=prompt_template_version,
        model_name=model_name,
    )


def evaluate_run(
    example: QGExample,
    candidate: CandidateQuestion,
    run_index: int,
    expected_complexity: int,
    config: ScoreConfig,
    gateway: Gateway,
    model: ModelConfig,
) -> RunScore:
    """Score one (candidate, run) pair through prompt, completion, and parsing.

    A degraded parse scores with its best-effort trace (optionally after one
    automatic re-query).
    """
    prompt = build_cot_qa_prompt(PromptRequest(example=example, candidate=candidate, mode=PromptMode.COT_QA))
    raw = gateway.cached_complete(CompletionRequest(config=model, prompt=prompt, run_index=run_index))
    try:
        trace = parse_cot_response(raw)
    except ParseDegraded as err:
        trace = err.trace
        if config.requery_degraded:
            raw = gateway.cached_complete(
                CompletionRequest(config=model, prompt=prompt, run_index=run_index + REQUERY_RUN_OFFSET)
            )
            try:
                trace = parse_cot_response(raw)
            except ParseDegraded as err2:
                trace = err2.trace
    n = naturalness_score(trace)
    a = answerability_score(trace, example.answer)
    c_abs = count_reasoning_steps(trace)
    c = complexity_similarity(c_abs, expected_complexity)
    return RunScore(n=n, a=a, c_abs=c_abs, c=c, naco=naco_aggregate(n, a, c, config), degraded=trace.degraded)


def aggregate_runs(runs: Sequence[RunScore], config: ScoreConfig) -> CriterionScores:
    """Average per-run scores into one CriterionScores record."""
    if not runs:
        raise ValueError("no runs to aggregate")
    n = fmean(r.n for r in runs)
    a = fmean(r.a for r in runs)
    c = fmean(r.c for r in runs)
    if config.run_aggregation == "mean_of_final":
        naco = fmean(r.naco for r in runs)
    else:
        naco = naco_aggregate(n, a, c, config)
    return CriterionScores(
        n_cand=n,
        a_cand=a,
        c_cand_abs=round(fmean(r.c_abs for r in runs)),
        c_cand=c,
        naco=naco,
        runs_used=len(runs),
    )


def score_candidate(
    example: QGExample,
    candidate: CandidateQuestion,
    profile: CalibrationProfile | int,
    config: ScoreConfig,
    gateway: Gateway,
    model: ModelConfig,
) -> CriterionScores:
    """Score one candidate over ``config.runs`` independent runs.

    ``profile`` is either a dataset calibration profile or a bare per-example
    expected complexity (used when the reference question's own step count
    overrides the dataset mode).
    """
    expected = profile.expected_complexity if isinstance(profile, CalibrationProfile) else int(profile)
    run_scores = [
        evaluate_run(example, candidate, run_index, expected, config, gateway, model)
        for run_index in range(config.runs)
    ]
    return aggregate_runs(run_scores, config)
