"""Reference-based baseline metrics and the score table they feed.

BLEU-4 is sentence-level with uniform weights over orders 1-4, a brevity
penalty against the closest reference length, and add-one smoothing on the
higher-order precisions (needed for per-candidate scores; unsmoothed
sentence BLEU is almost always 0). ROUGE-L is the LCS F-measure. Both share
one tokenizer: lowercase, punctuation split off as separate tokens.

Neural metrics are not implemented here; their scores arrive through
``ingest_external_scores`` from CSV files.
"""

from __future__ import annotations

import csv
import hashlib
import math
import re
import warnings
from collections import Counter
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Sequence

_TOKEN_RE = re.compile(r"\w+|[^\w\s]")


class EmptyList(ValueError):
    """An aggregation received no scores."""


class SchemaMismatch(ValueError):
    """An ingestion file's header does not match the expected schema."""


class DuplicateCell(ValueError):
    """Two values were written to the same (example_id, system, metric) cell."""


class CoverageGap(Warning):
    """An ingested column misses some of the loaded candidates."""


def tokenize(text: str) -> list[str]:
    """Lowercase and split, with punctuation as separate tokens."""
    return _TOKEN_RE.findall(text.lower())


def _ngram_counts(tokens: Sequence[str], n: int) -> Counter:
    return Counter(tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1))


def _closest_ref_length(cand_len: int, ref_lens: Sequence[int]) -> int:
    return min(ref_lens, key=lambda r: (abs(r - cand_len), r))


def _bleu_from_stats(matches: list[int], totals: list[int], cand_len: int, ref_len: int) -> float:
    if matches[0] == 0:
        return 0.0
    log_sum = 0.0
    for n in range(4):
        if n == 0:
            p = matches[0] / max(1, totals[0])
        else:
            p = (matches[n] + 1) / (max(1, totals[n]) + 1)
        log_sum += 0.25 * math.log(p)
    if cand_len == 0:
        return 0.0
    bp = 1.0 if cand_len > ref_len else math.exp(1 - ref_len / cand_len)
    return bp * math.exp(log_sum)


def _pair_stats(cand: Sequence[str], refs: Sequence[Sequence[str]]) -> tuple[list[int], list[int]]:
    matches, totals = [], []
    for n in range(1, 5):
        cand_counts = _ngram_counts(cand, n)
        max_ref = Counter()
        for ref in refs:
            for gram, count in _ngram_counts(ref, n).items():
                if count > max_ref[gram]:
                    max_ref[gram] = count
        matches.append(sum(min(count, max_ref[gram]) for gram, count in cand_counts.items()))
        totals.append(max(len(cand) - n + 1, 0))
    return matches, totals


def bleu4(candidate: str, references: Sequence[str]) -> float:
    """Sentence-level BLEU-4 of a candidate against one or more references."""
    if not references:
        raise ValueError("bleu4 requires at least one reference")
    cand = tokenize(candidate)
    refs = [tokenize(r) for r in references]
    matches, totals = _pair_stats(cand, refs)
    ref_len = _closest_ref_length(len(cand), [len(r) for r in refs])
    return _bleu_from_stats(matches, totals, len(cand), ref_len)


def corpus_bleu4(candidates: Sequence[str], references_list: Sequence[Sequence[str]]) -> float:
    """Corpus-level BLEU-4: n-gram statistics pooled over all segments."""
    if len(candidates) != len(references_list) or not candidates:
        raise ValueError("need equal, non-empty candidate and reference lists")
    agg_matches, agg_totals = [0] * 4, [0] * 4
    cand_len_sum = ref_len_sum = 0
    for candidate, references in zip(candidates, references_list):
        if not references:
            raise ValueError("every segment needs at least one reference")
        cand = tokenize(candidate)
        refs = [tokenize(r) for r in references]
        matches, totals = _pair_stats(cand, refs)
        for n in range(4):
            agg_matches[n] += matches[n]
            agg_totals[n] += totals[n]
        cand_len_sum += len(cand)
        ref_len_sum += _closest_ref_length(len(cand), [len(r) for r in refs])
    return _bleu_from_stats(agg_matches, agg_totals, cand_len_sum, ref_len_sum)


def lcs_length(a: Sequence[str], b: Sequence[str]) -> int:
    """Length of the longest common subsequence (iterative DP, rolling row)."""
    if not a or not b:
        return 0
    prev = [0] * (len(b) + 1)
    for x in a:
        curr = [0]
        for j, y in enumerate(b, start=1):
            if x == y:
                curr.append(prev[j - 1] + 1)
            else:
                curr.append(max(prev[j], curr[j - 1]))
        prev = curr
    return prev[-1]


def rouge_l(candidate: str, reference: str) -> float:
    """ROUGE-L F-measure: LCS-based precision/recall harmonic mean."""
    cand = tokenize(candidate)
    ref = tokenize(reference)
    if not cand or not ref:
        return 0.0
    lcs = lcs_length(cand, ref)
    if lcs == 0:
        return 0.0
    precision = lcs / len(cand)
    recall = lcs / len(ref)
    return 2 * precision * recall / (precision + recall)


def max_over_references(scores: Sequence[float]) -> float:
    """Maximum aggregation over per-reference scores."""
    if not scores:
        raise EmptyList("no scores to aggregate")
    return max(scores)


class Provenance(Enum):
    NATIVE = "native"
    INGESTED = "ingested"


@dataclass
class IngestReport:
    metric: str
    rows_added: int
    fingerprint: str
    missing_ids: list[tuple[str, str]] = field(default_factory=list)


class ScoreTable:
    """Scores keyed by (example_id, system), one column per metric.

    Column order follows first insertion; rows are reported sorted. Ingested
    columns carry a fingerprint of their source file.
    """

    def __init__(self):
        self._cells: dict[tuple[str, str], dict[str, float]] = {}
        self._metrics: list[str] = []
        self.provenance: dict[str, Provenance] = {}
        self.fingerprints: dict[str, str] = {}

    def register_metric(self, metric: str, provenance: Provenance = Provenance.NATIVE) -> None:
        """Declare a column (idempotent); first declaration fixes its order and provenance."""
        if metric not in self.provenance:
            self._metrics.append(metric)
            self.provenance[metric] = provenance

    def set_cell(
        self,
        example_id: str,
        system: str,
        metric: str,
        value: float,
        provenance: Provenance = Provenance.NATIVE,
    ) -> None:
        row = self._cells.setdefault((example_id, system), {})
        if metric in row:
            raise DuplicateCell(f"duplicate cell ({example_id}, {system}, {metric})")
        row[metric] = float(value)
        self.register_metric(metric, provenance)

    def get(self, example_id: str, system: str, metric: str) -> float | None:
        return self._cells.get((example_id, system), {}).get(metric)

    def rows(self) -> list[tuple[str, str]]:
        return sorted(self._cells)

    def metrics(self) -> list[str]:
        return list(self._metrics)

    def column(self, metric: str) -> dict[tuple[str, str], float]:
        return {key: row[metric] for key, row in self._cells.items() if metric in row}

    def drop_column(self, metric: str) -> None:
        for row in self._cells.values():
            row.pop(metric, None)
        if metric in self.provenance:
            self._metrics.remove(metric)
            del self.provenance[metric]
            self.fingerprints.pop(metric, None)

    def systems(self) -> list[str]:
        return sorted({system for _, system in self._cells})


def ingest_external_scores(table: ScoreTable, path: str | Path, metric_name: str) -> IngestReport:
    """Add an externally computed metric column from a CSV file.

    The file schema is ``example_id,system,score``. Rows must cover the
    candidates already in the table; any gap is reported (and warned) rather
    than failed.
    """
    path = Path(path)
    raw = path.read_bytes()
    fingerprint = hashlib.sha256(raw).hexdigest()[:16]
    existing_rows = set(table.rows())
    added = 0
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != ["example_id", "system", "score"]:
            raise SchemaMismatch(f"{path}: expected header 'example_id,system,score', got {header}")
        for line_no, row in enumerate(reader, start=2):
            if len(row) != 3:
                raise SchemaMismatch(f"{path}:{line_no}: expected 3 fields, got {len(row)}")
            example_id, system, score = row
            try:
                value = float(score)
            except ValueError as err:
                raise SchemaMismatch(f"{path}:{line_no}: score {score!r} is not a number") from err
            table.set_cell(example_id, system, metric_name, value, provenance=Provenance.INGESTED)
            added += 1
    table.fingerprints[metric_name] = fingerprint
    covered = set(table.column(metric_name))
    missing = sorted(existing_rows - covered)
    if missing:
        warnings.warn(
            CoverageGap(f"{metric_name}: {len(missing)} candidate(s) not covered: {missing}"),
            stacklevel=2,
        )
    return IngestReport(metric=metric_name, rows_added=added, fingerprint=fingerprint, missing_ids=missing)
