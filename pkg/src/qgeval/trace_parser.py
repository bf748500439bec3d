"""Parsers turning raw model responses into structured traces and rubric scores.

Verdict detection is phrase-based (the prompt instructs literal outputs) and
restricted to the first response section so quoted instructions later in the
text cannot trigger a false verdict. Precedence: NOT_A_QUESTION, then
UNNATURAL, then OK. Step markers accept several numbering styles because live
models drift from the requested format.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from enum import Enum


class Verdict(Enum):
    OK = "ok"
    NOT_A_QUESTION = "not_a_question"
    UNNATURAL = "unnatural"


@dataclass
class CoTTrace:
    """Structured view of one chain-of-thought QA response."""

    verdict: Verdict
    steps: list[str] = field(default_factory=list)
    answer: str | None = None
    raw: str = ""
    degraded: bool = False


class ParseDegraded(Exception):
    """Response deviated from the format; ``trace`` holds the best-effort parse.

    Raised when the verdict is OK but the step block is missing or no answer
    span was found. Recoverable: batch scoring proceeds with the carried trace.
    """

    def __init__(self, message: str, trace: CoTTrace):
        super().__init__(message)
        self.trace = trace


class ParseFailed(Exception):
    """A required labeled line is missing or not an integer."""


class OutOfRange(Exception):
    """A rubric rating fell outside the 0-2 scale."""


@dataclass(frozen=True)
class DirectEvalScores:
    naturalness: int
    answerability: int
    complexity: int

    def __post_init__(self) -> None:
        for name in ("naturalness", "answerability", "complexity"):
            value = getattr(self, name)
            if not 0 <= value <= 2:
                raise OutOfRange(f"{name} rating {value} outside 0-2")

    @property
    def total(self) -> int:
        return self.naturalness + self.answerability + self.complexity


_STEP_BLOCK_RE = re.compile(r"step[\s-]*by[\s-]*step\s+reasoning\s*:?", re.IGNORECASE)
_ANSWER_LINE_RE = re.compile(r"^\s*(?:\d+[.)]\s*)?answer\s*:", re.IGNORECASE | re.MULTILINE)
_ANS_TOKEN = "<ans>"

_STEP_PATTERNS = [
    re.compile(r"^\s*(?:[a-z][.)]\s*)?step\s+\d+\s*[:.)\-]*\s*(?P<body>.*)$", re.IGNORECASE),
    re.compile(r"^\s*\d+[.)]\s+(?P<body>.*)$"),
    re.compile(r"^\s*[-*•]\s+(?P<body>.*)$"),
]

_DIRECT_LABELS = ("naturalness", "answerability", "complexity")


def _match_step(line: str) -> str | None:
    for pattern in _STEP_PATTERNS:
        m = pattern.match(line)
        if m:
            return m.group("body").strip()
    return None


def _steps_in(text: str) -> list[str]:
    steps = []
    for line in text.splitlines():
        body = _match_step(line)
        if body is not None:
            steps.append(body)
    return steps


def parse_cot_response(raw: str) -> CoTTrace:
    """Parse one chain-of-thought QA response.

    Raises ParseDegraded (carrying the best-effort trace) when the verdict is
    OK but the response lacks a step block or an answer span.
    """
    block_match = _STEP_BLOCK_RE.search(raw)
    answer_match = _ANSWER_LINE_RE.search(raw)

    # Section 1 ends at the step block, the answer line, or the first answer
    # token, whichever comes first.
    cut_points = [len(raw)]
    if block_match:
        cut_points.append(block_match.start())
    if answer_match:
        cut_points.append(answer_match.start())
    token_pos = raw.find(_ANS_TOKEN)
    if token_pos != -1:
        cut_points.append(token_pos)
    section_one = raw[: min(cut_points)].lower()

    if "not a question" in section_one:
        verdict = Verdict.NOT_A_QUESTION
    elif "question unnatural" in section_one:
        verdict = Verdict.UNNATURAL
    else:
        verdict = Verdict.OK

    if block_match:
        block_end = len(raw)
        tail_answer = _ANSWER_LINE_RE.search(raw, block_match.end())
        if tail_answer:
            block_end = tail_answer.start()
        tail_token = raw.find(_ANS_TOKEN, block_match.end())
        if tail_token != -1:
            block_end = min(block_end, tail_token)
        steps = _steps_in(raw[block_match.end() : block_end])
    else:
        # Best effort without the header: only explicit "Step k" lines count,
        # since bare numbered lines are the response's section headers.
        steps = [s for line in raw.splitlines() if (s := _step_line_only(line)) is not None]

    parts = raw.split(_ANS_TOKEN)
    answer = parts[1].strip() if len(parts) >= 3 else None

    trace = CoTTrace(verdict=verdict, steps=steps, answer=answer, raw=raw)
    if verdict is Verdict.OK:
        problems = []
        if not block_match:
            problems.append("no step block")
        if answer is None:
            problems.append("no answer span")
        if problems:
            trace.degraded = True
            raise ParseDegraded("; ".join(problems), trace)
    return trace


def _step_line_only(line: str) -> str | None:
    m = _STEP_PATTERNS[0].match(line)
    return m.group("body").strip() if m else None


def count_reasoning_steps(trace: CoTTrace) -> int:
    """Number of parsed reasoning steps; 0 for any non-OK verdict."""
    if trace.verdict is not Verdict.OK:
        return 0
    return len(trace.steps)


def parse_direct_eval_response(raw: str) -> DirectEvalScores:
    """Extract the three labeled integer ratings from a rubric-mode response."""
    values = {}
    for label in _DIRECT_LABELS:
        m = re.search(rf"^\s*{label}\s*:\s*(-?\d+)\b", raw, re.IGNORECASE | re.MULTILINE)
        if not m:
            raise ParseFailed(f"missing or non-integer {label!r} line")
        value = int(m.group(1))
        if not 0 <= value <= 2:
            raise OutOfRange(f"{label} rating {value} outside 0-2")
        values[label] = value
    return DirectEvalScores(**values)
