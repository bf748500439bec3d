#!/usr/bin/env python3
"""Generate frozen golden values for the sentence-overlap baselines.

Writes tests/data/metric_goldens.json: a 50-pair corpus with BLEU-4 and
ROUGE-L values computed by the independent oracle below, plus one
corpus-level BLEU-4 value over all pairs.

The oracle shares only the metric *definitions* with the package:
exact Fraction arithmetic, per-reference clip counts built explicitly,
geometric mean via a product root instead of summed logs, and LCS via
memoized recursion instead of an iterative table. The package's test suite
asserts agreement within 1e-6. Run once and commit the JSON; rerunning is
deterministic.
"""

from __future__ import annotations

import json
import random
import sys
from fractions import Fraction
from functools import lru_cache
from pathlib import Path

OUT = Path(__file__).resolve().parent.parent / "tests" / "data" / "metric_goldens.json"

_WORD_CHARS = set("abcdefghijklmnopqrstuvwxyz0123456789_")


def tokenize(text: str) -> list[str]:
    """Character-scanner equivalent of the package tokenizer (ASCII inputs)."""
    tokens: list[str] = []
    word = ""
    for ch in text.lower():
        if ch in _WORD_CHARS:
            word += ch
            continue
        if word:
            tokens.append(word)
            word = ""
        if not ch.isspace():
            tokens.append(ch)
    if word:
        tokens.append(word)
    return tokens


def _ngrams(tokens: list[str], n: int) -> list[tuple[str, ...]]:
    return [tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1)]


def _clipped_matches(cand: list[str], refs: list[list[str]], n: int) -> int:
    cand_grams = _ngrams(cand, n)
    matches = 0
    for gram in set(cand_grams):
        cand_count = cand_grams.count(gram)
        best = 0
        for ref in refs:
            ref_count = _ngrams(ref, n).count(gram)
            if ref_count > best:
                best = ref_count
        matches += min(cand_count, best)
    return matches


def _closest_ref_len(cand_len: int, ref_lens: list[int]) -> int:
    best = ref_lens[0]
    for length in ref_lens[1:]:
        if (abs(length - cand_len), length) < (abs(best - cand_len), best):
            best = length
    return best


def oracle_bleu_stats(cand: list[str], refs: list[list[str]]):
    matches = [_clipped_matches(cand, refs, n) for n in range(1, 5)]
    totals = [max(len(cand) - n + 1, 0) for n in range(1, 5)]
    return matches, totals


def oracle_bleu_from_stats(matches, totals, cand_len: int, ref_len: int) -> float:
    if matches[0] == 0 or cand_len == 0:
        return 0.0
    product = Fraction(matches[0], max(1, totals[0]))
    for n in range(1, 4):
        product *= Fraction(matches[n] + 1, max(1, totals[n]) + 1)
    geo_mean = float(product) ** 0.25
    import math

    bp = 1.0 if cand_len > ref_len else math.exp(1 - ref_len / cand_len)
    return bp * geo_mean


def oracle_bleu4(candidate: str, references: list[str]) -> float:
    cand = tokenize(candidate)
    refs = [tokenize(r) for r in references]
    matches, totals = oracle_bleu_stats(cand, refs)
    ref_len = _closest_ref_len(len(cand), [len(r) for r in refs])
    return oracle_bleu_from_stats(matches, totals, len(cand), ref_len)


def oracle_corpus_bleu4(pairs: list[tuple[str, list[str]]]) -> float:
    agg_m, agg_t = [0] * 4, [0] * 4
    cand_len = ref_len = 0
    for candidate, references in pairs:
        cand = tokenize(candidate)
        refs = [tokenize(r) for r in references]
        matches, totals = oracle_bleu_stats(cand, refs)
        for n in range(4):
            agg_m[n] += matches[n]
            agg_t[n] += totals[n]
        cand_len += len(cand)
        ref_len += _closest_ref_len(len(cand), [len(r) for r in refs])
    return oracle_bleu_from_stats(agg_m, agg_t, cand_len, ref_len)


def oracle_rouge_l(candidate: str, reference: str) -> float:
    cand = tuple(tokenize(candidate))
    ref = tuple(tokenize(reference))
    if not cand or not ref:
        return 0.0

    @lru_cache(maxsize=None)
    def lcs(i: int, j: int) -> int:
        if i == len(cand) or j == len(ref):
            return 0
        if cand[i] == ref[j]:
            return 1 + lcs(i + 1, j + 1)
        return max(lcs(i + 1, j), lcs(i, j + 1))

    length = lcs(0, 0)
    if length == 0:
        return 0.0
    p = Fraction(length, len(cand))
    r = Fraction(length, len(ref))
    return float(2 * p * r / (p + r))


HAND_PAIRS = [
    ("the cat sat on the mat", "the cat is on the mat"),
    ("who wrote the opera performed at the harbor festival?",
     "which composer wrote the opera performed at the harbor festival?"),
    ("in what year was the stone bridge across the river completed?",
     "when was the stone bridge over the river finished?"),
    ("the lighthouse keeper kept a log of every storm.",
     "did the lighthouse keeper keep a log of every storm?"),
    ("what is the tallest tower in the old town?", "what is the tallest tower in the old town?"),
    ("purple elephants dream quietly", "the committee approved the annual budget"),
    ("a b", "a b c d e f"),
    ("one", "one"),
    ("", "what does the empty candidate score?"),
    ("how many guests can the mountain refuge sleep, and since when?",
     "how many guests does the refuge on the lake sleep?"),
]

VOCAB = (
    "river bridge tower lighthouse keeper storm harbor festival opera composer "
    "year town map atlas pigment violet comet glacier lake refuge abbey maple "
    "library museum bell island causeway marsh trilogy novelist"
).split()


def random_pairs(rng: random.Random, count: int) -> list[tuple[str, str]]:
    pairs = []
    for _ in range(count):
        ref_len = rng.randint(3, 14)
        ref = [rng.choice(VOCAB) for _ in range(ref_len)]
        cand = list(ref)
        for _ in range(rng.randint(0, max(1, ref_len // 2))):
            op = rng.choice(("sub", "del", "ins"))
            if op == "sub" and cand:
                cand[rng.randrange(len(cand))] = rng.choice(VOCAB)
            elif op == "del" and len(cand) > 1:
                del cand[rng.randrange(len(cand))]
            else:
                cand.insert(rng.randrange(len(cand) + 1), rng.choice(VOCAB))
        candidate = " ".join(cand)
        reference = " ".join(ref)
        if rng.random() < 0.3:
            candidate += "?"
            reference += "?"
        pairs.append((candidate, reference))
    return pairs


def main() -> None:
    rng = random.Random(20240513)
    pairs = HAND_PAIRS + random_pairs(rng, 50 - len(HAND_PAIRS))
    assert len(pairs) == 50

    records = []
    for candidate, reference in pairs:
        records.append({
            "candidate": candidate,
            "reference": reference,
            "bleu4": oracle_bleu4(candidate, [reference]),
            "rouge_l": oracle_rouge_l(candidate, reference),
        })
    corpus_pairs = [(c, [r]) for c, r in pairs if tokenize(c)]
    golden = {
        "pairs": records,
        "corpus_bleu4": oracle_corpus_bleu4(corpus_pairs),
    }
    OUT.parent.mkdir(parents=True, exist_ok=True)
    OUT.write_text(json.dumps(golden, indent=2) + "\n", encoding="utf-8")
    print(f"wrote {OUT} ({len(records)} pairs)")


if __name__ == "__main__":
    sys.exit(main())
