"""Prompt construction for the two evaluation modes.

COT_QA asks the model to answer the candidate question with explicit numbered
reasoning steps; DIRECT_EVAL hands the model the human rating rubric and asks
for one 0-2 integer per criterion. Templates live in ``templates/`` as
versioned text assets; the active version string travels with every score
record so downstream artifacts are attributable.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from importlib import resources

from .core import CandidateQuestion, QGExample

COT_QA_TEMPLATE_VERSION = "cot_qa_v1"
DIRECT_EVAL_TEMPLATE_VERSION = "direct_eval_v1"


class PromptMode(Enum):
    COT_QA = "cot_qa"
    DIRECT_EVAL = "direct_eval"


class PromptError(ValueError):
    """Invalid prompt request (wrong mode, missing passages or reference)."""


@dataclass(frozen=True)
class PromptRequest:
    example: QGExample
    candidate: CandidateQuestion
    mode: PromptMode
    append_reference: bool = False


@lru_cache(maxsize=None)
def _template(name: str) -> str:
    return resources.files(__package__).joinpath(f"templates/{name}.txt").read_text(encoding="utf-8")


def _passages_block(passages: tuple[str, ...]) -> str:
    return "\n\n".join(f"Context Passage {i}: {text}" for i, text in enumerate(passages, start=1))


def build_cot_qa_prompt(request: PromptRequest) -> str:
    """Render the chain-of-thought QA prompt for one candidate question."""
    if request.mode is not PromptMode.COT_QA:
        raise PromptError(f"expected COT_QA mode, got {request.mode}")
    passages = request.example.passages
    if not passages:
        raise PromptError(f"example {request.example.id!r} has no passages")
    return _template(COT_QA_TEMPLATE_VERSION).format(
        one_or_two="one" if len(passages) == 1 else "two",
        passages_block=_passages_block(passages),
        sentence=request.candidate.text,
    )


def build_direct_eval_prompt(request: PromptRequest) -> str:
    """Render the rubric-rating prompt; optionally append the reference question."""
    if request.mode is not PromptMode.DIRECT_EVAL:
        raise PromptError(f"expected DIRECT_EVAL mode, got {request.mode}")
    passages = request.example.passages
    if not passages:
        raise PromptError(f"example {request.example.id!r} has no passages")
    if request.append_reference and not request.example.reference_question:
        raise PromptError(f"example {request.example.id!r} has no reference question to append")
    prompt = _template(DIRECT_EVAL_TEMPLATE_VERSION).format(
        one_or_two="one" if len(passages) == 1 else "two",
        passages_block=_passages_block(passages),
        answer=request.example.answer,
        candidate=request.candidate.text,
    )
    if request.append_reference:
        prompt = prompt.rstrip("\n") + f"\n\nReference question: {request.example.reference_question}\n"
    return prompt
