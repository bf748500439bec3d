"""Shared domain types, answer normalization, and token-overlap F1."""

from __future__ import annotations

import re
import string
from collections import Counter
from dataclasses import dataclass, field

_PUNCT_TABLE = str.maketrans("", "", string.punctuation)
_ARTICLE_RE = re.compile(r"\b(a|an|the)\b")


@dataclass(frozen=True)
class QGExample:
    """One benchmark item: context passage(s), a gold answer span, and optional extras."""

    id: str
    passages: tuple[str, ...]
    answer: str
    clues: tuple[str, ...] | None = None
    reference_question: str | None = None
    dataset_id: str = ""

    def __post_init__(self) -> None:
        object.__setattr__(self, "passages", tuple(self.passages))
        if self.clues is not None:
            object.__setattr__(self, "clues", tuple(self.clues))
        if len(self.passages) not in (1, 2):
            raise ValueError(f"example {self.id!r}: expected 1 or 2 passages, got {len(self.passages)}")
        if not self.answer:
            raise ValueError(f"example {self.id!r}: answer must be non-empty")


@dataclass(frozen=True)
class CandidateQuestion:
    """A question under evaluation, tagged with the system (or group) that produced it."""

    example_id: str
    text: str
    system: str

    def __post_init__(self) -> None:
        if not self.text:
            raise ValueError(f"candidate for {self.example_id!r} ({self.system}): text must be non-empty")


@dataclass(frozen=True)
class TokenBag:
    """Multiset of normalized tokens (lowercase, punctuation-free, articles dropped)."""

    tokens: Counter = field(default_factory=Counter)

    def __len__(self) -> int:
        return sum(self.tokens.values())

    def __bool__(self) -> bool:
        return len(self) > 0

    def overlap(self, other: "TokenBag") -> int:
        """Size of the multiset intersection (per-token minimum multiplicity)."""
        return sum((self.tokens & other.tokens).values())


def normalize_text(text: str) -> TokenBag:
    """Normalize answer text into a token multiset.

    Lowercase, strip all punctuation characters, drop the articles
    "a" / "an" / "the", and split on whitespace.
    """
    lowered = text.lower().translate(_PUNCT_TABLE)
    no_articles = _ARTICLE_RE.sub(" ", lowered)
    return TokenBag(Counter(no_articles.split()))


def token_f1(prediction: str, gold: str) -> float:
    """Token-level F1 between two answer strings over normalized token multisets.

    Both bags empty -> 1.0, exactly one empty -> 0.0, no overlap -> 0.0.
    """
    pred_bag = normalize_text(prediction)
    gold_bag = normalize_text(gold)
    if not pred_bag and not gold_bag:
        return 1.0
    if not pred_bag or not gold_bag:
        return 0.0
    overlap = pred_bag.overlap(gold_bag)
    if overlap == 0:
        return 0.0
    precision = overlap / len(pred_bag)
    recall = overlap / len(gold_bag)
    return 2 * precision * recall / (precision + recall)
