"""Agreement with human judgment: correlations, normalization, group reports.

Kendall's coefficient is the tie-corrected tau-b, since 3-point human
ratings are tie-heavy. Spearman is Pearson over average fractional ranks.
"""

from __future__ import annotations

import math
import random
import warnings
from collections import defaultdict
from dataclasses import dataclass
from typing import Mapping, Sequence

from .baselines import ScoreTable


class DegenerateInput(ValueError):
    """Correlation input too short, mismatched, or constant."""


class EmptyGroup(ValueError):
    """A declared group has no rows in the score table."""


class EmptyRatings(ValueError):
    """Rating aggregation received no ratings."""


class NotEnoughDisagreements(Warning):
    """Fewer disagreement pairs exist than were requested."""


@dataclass(frozen=True)
class HumanRating:
    example_id: str
    system: str
    rater_id: str
    naturalness: int
    answerability: int
    complexity: int

    def __post_init__(self) -> None:
        for name in ("naturalness", "answerability", "complexity"):
            if getattr(self, name) not in (0, 1, 2):
                raise ValueError(f"{name} rating must be 0, 1, or 2")


@dataclass(frozen=True)
class AggregatedRating:
    example_id: str
    system: str
    mean_naturalness: float
    mean_answerability: float
    mean_complexity: float
    n_raters: int

    @property
    def mean_total(self) -> float:
        return self.mean_naturalness + self.mean_answerability + self.mean_complexity


@dataclass(frozen=True)
class CorrelationReport:
    metric: str
    target: str
    pearson_r: float
    spearman_rho: float
    kendall_tau: float
    n: int


def _check_vectors(x: Sequence[float], y: Sequence[float]) -> None:
    if len(x) != len(y):
        raise DegenerateInput(f"length mismatch: {len(x)} vs {len(y)}")
    if len(x) < 2:
        raise DegenerateInput("need at least 2 observations")
    if min(x) == max(x) or min(y) == max(y):
        raise DegenerateInput("constant vector")


def pearson(x: Sequence[float], y: Sequence[float]) -> float:
    """Sample Pearson correlation coefficient."""
    _check_vectors(x, y)
    n = len(x)
    mx = math.fsum(x) / n
    my = math.fsum(y) / n
    cov = math.fsum((a - mx) * (b - my) for a, b in zip(x, y))
    vx = math.fsum((a - mx) ** 2 for a in x)
    vy = math.fsum((b - my) ** 2 for b in y)
    return cov / math.sqrt(vx * vy)


def _ranks(values: Sequence[float]) -> list[float]:
    """1-based fractional ranks; tied values share their average rank."""
    order = sorted(range(len(values)), key=lambda i: values[i])
    ranks = [0.0] * len(values)
    i = 0
    while i < len(order):
        j = i
        while j + 1 < len(order) and values[order[j + 1]] == values[order[i]]:
            j += 1
        avg = (i + j) / 2 + 1
        for k in range(i, j + 1):
            ranks[order[k]] = avg
        i = j + 1
    return ranks


def spearman(x: Sequence[float], y: Sequence[float]) -> float:
    """Spearman rank correlation: Pearson over average fractional ranks."""
    _check_vectors(x, y)
    return pearson(_ranks(x), _ranks(y))


def kendall_tau(x: Sequence[float], y: Sequence[float]) -> float:
    """Kendall tau-b, corrected for ties in either argument."""
    _check_vectors(x, y)
    n = len(x)
    concordant = discordant = ties_x = ties_y = 0
    for i in range(n):
        for j in range(i + 1, n):
            dx = x[i] - x[j]
            dy = y[i] - y[j]
            if dx == 0:
                ties_x += 1
            if dy == 0:
                ties_y += 1
            if dx == 0 or dy == 0:
                continue
            if (dx > 0) == (dy > 0):
                concordant += 1
            else:
                discordant += 1
    n0 = n * (n - 1) // 2
    denom = math.sqrt((n0 - ties_x) * (n0 - ties_y))
    return (concordant - discordant) / denom


def min_max_normalize(scores: Sequence[float]) -> list[float]:
    """Scale scores to [0, 1]; a constant vector maps to all 0.5."""
    if not scores:
        raise ValueError("cannot normalize an empty vector")
    lo, hi = min(scores), max(scores)
    if lo == hi:
        return [0.5] * len(scores)
    return [(s - lo) / (hi - lo) for s in scores]


def aggregate_human_ratings(ratings: Sequence[HumanRating]) -> AggregatedRating:
    """Average the raters' scores for one (example_id, system) pair."""
    if not ratings:
        raise EmptyRatings("no ratings to aggregate")
    keys = {(r.example_id, r.system) for r in ratings}
    if len(keys) > 1:
        raise ValueError(f"ratings span multiple candidates: {sorted(keys)}")
    n = len(ratings)
    return AggregatedRating(
        example_id=ratings[0].example_id,
        system=ratings[0].system,
        mean_naturalness=sum(r.naturalness for r in ratings) / n,
        mean_answerability=sum(r.answerability for r in ratings) / n,
        mean_complexity=sum(r.complexity for r in ratings) / n,
        n_raters=n,
    )


def aggregate_all_ratings(ratings: Sequence[HumanRating]) -> list[AggregatedRating]:
    """Group a rating file by candidate and aggregate each group."""
    grouped: dict[tuple[str, str], list[HumanRating]] = defaultdict(list)
    for rating in ratings:
        grouped[(rating.example_id, rating.system)].append(rating)
    return [aggregate_human_ratings(grouped[key]) for key in sorted(grouped)]


@dataclass(frozen=True)
class GroupSummary:
    means: dict[str, dict[str, float]]  # group -> metric -> mean
    gaps: dict[tuple[str, str], dict[str, float]]  # (group_a, group_b) -> metric -> mean_a - mean_b
    sizes: dict[str, int]


def group_summary(table: ScoreTable, groups: Mapping[str, str] | None = None) -> GroupSummary:
    """Per-group per-metric means plus pairwise mean gaps.

    ``groups`` maps a system label to its group tag; unmapped systems form
    their own group.
    """
    by_group: dict[str, list[tuple[str, str]]] = defaultdict(list)
    for example_id, system in table.rows():
        tag = groups.get(system, system) if groups else system
        by_group[tag].append((example_id, system))
    if groups:
        for declared in set(groups.values()):
            if declared not in by_group:
                raise EmptyGroup(f"group {declared!r} has no rows")
    if not by_group:
        raise EmptyGroup("score table is empty")

    means: dict[str, dict[str, float]] = {}
    for tag in sorted(by_group):
        means[tag] = {}
        for metric in table.metrics():
            values = [v for key in by_group[tag] if (v := table.get(*key, metric)) is not None]
            if values:
                # fsum keeps the mean exact, hence order-independent.
                means[tag][metric] = math.fsum(values) / len(values)
    tags = sorted(by_group)
    gaps = {
        (a, b): {
            metric: means[a][metric] - means[b][metric]
            for metric in table.metrics()
            if metric in means[a] and metric in means[b]
        }
        for i, a in enumerate(tags)
        for b in tags[i + 1 :]
    }
    sizes = {tag: len(rows) for tag, rows in by_group.items()}
    return GroupSummary(means=means, gaps=gaps, sizes=sizes)


def sample_disagreement_pairs(
    table: ScoreTable,
    metric_a: str,
    metric_b: str,
    k: int,
    seed: int = 0,
) -> list[tuple[tuple[str, str], tuple[str, str]]]:
    """Sample k unordered row pairs the two metrics rank in opposite orders.

    A pair qualifies when metric_a strictly prefers one row and metric_b
    strictly prefers the other. With fewer than k qualifying pairs, all are
    returned and a NotEnoughDisagreements warning is emitted.
    """
    col_a = table.column(metric_a)
    col_b = table.column(metric_b)
    rows = sorted(set(col_a) & set(col_b))
    qualifying = []
    for i in range(len(rows)):
        for j in range(i + 1, len(rows)):
            da = col_a[rows[i]] - col_a[rows[j]]
            db = col_b[rows[i]] - col_b[rows[j]]
            if da * db < 0:
                qualifying.append((rows[i], rows[j]))
    if len(qualifying) < k:
        warnings.warn(
            NotEnoughDisagreements(f"only {len(qualifying)} disagreement pair(s), wanted {k}"),
            stacklevel=2,
        )
        return qualifying
    return random.Random(seed).sample(qualifying, k)


def correlate(
    metric_values: Sequence[float],
    target_values: Sequence[float],
    metric: str,
    target: str,
) -> CorrelationReport:
    """All three coefficients for one metric/target pairing."""
    return CorrelationReport(
        metric=metric,
        target=target,
        pearson_r=pearson(metric_values, target_values),
        spearman_rho=spearman(metric_values, target_values),
        kendall_tau=kendall_tau(metric_values, target_values),
        n=len(metric_values),
    )
