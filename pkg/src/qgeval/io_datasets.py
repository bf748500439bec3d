"""JSONL loaders for examples, candidates, and ratings; CSV score-table persistence.

Every malformed line yields an error naming the line and field; nothing loads
partially and silently. The score table is a CSV with header
``example_id,system,<metric1>,<metric2>,...``; column provenance and source
fingerprints ride in a ``<path>.meta.json`` sidecar so round trips are
lossless. A table read without its sidecar treats every column as ingested.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path

from .analysis import HumanRating
from .baselines import Provenance, ScoreTable
from .core import CandidateQuestion, QGExample


class SchemaError(ValueError):
    """A file deviates from its schema; carries path, line, and field."""

    def __init__(self, path, line_no: int | None, field: str | None, message: str):
        location = f"{path}" + (f":{line_no}" if line_no is not None else "")
        detail = f" (field {field!r})" if field else ""
        super().__init__(f"{location}: {message}{detail}")
        self.path = str(path)
        self.line_no = line_no
        self.field = field


class DuplicateId(ValueError):
    """Two example lines share an id."""


class PassageCountMismatch(ValueError):
    """An example's passage count differs from the manifest's expectation."""


class UnknownExampleId(ValueError):
    """A candidate references an example id that was not loaded."""


@dataclass(frozen=True)
class DatasetManifest:
    dataset_id: str
    examples_path: str = ""
    expected_passages: int | None = None  # 1 or 2; None skips the check
    notes: str = ""


def _jsonl_records(path: Path):
    with path.open(encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except ValueError as err:
                raise SchemaError(path, line_no, None, f"invalid JSON: {err}") from err
            if not isinstance(record, dict):
                raise SchemaError(path, line_no, None, "expected a JSON object")
            yield line_no, record


def _require(record: dict, key: str, kind, path: Path, line_no: int):
    if key not in record:
        raise SchemaError(path, line_no, key, "missing required field")
    value = record[key]
    if not isinstance(value, kind):
        raise SchemaError(path, line_no, key, f"expected {kind.__name__}, got {type(value).__name__}")
    return value


def load_examples(path: str | Path, manifest: DatasetManifest | None = None) -> list[QGExample]:
    """Load and validate a JSONL examples file.

    Schema per line: ``{id, passages: [str, ...], answer, clues?, reference_question?, dataset_id?}``.
    """
    path = Path(path)
    examples: list[QGExample] = []
    seen: dict[str, int] = {}
    for line_no, record in _jsonl_records(path):
        example_id = _require(record, "id", str, path, line_no)
        passages = _require(record, "passages", list, path, line_no)
        if not passages or not all(isinstance(p, str) and p for p in passages):
            raise SchemaError(path, line_no, "passages", "must be a non-empty list of non-empty strings")
        if len(passages) not in (1, 2):
            raise SchemaError(path, line_no, "passages", f"expected 1 or 2 passages, got {len(passages)}")
        answer = _require(record, "answer", str, path, line_no)
        if not answer:
            raise SchemaError(path, line_no, "answer", "must be non-empty")
        clues = record.get("clues")
        if clues is not None and not (isinstance(clues, list) and all(isinstance(c, str) for c in clues)):
            raise SchemaError(path, line_no, "clues", "must be a list of strings")
        reference = record.get("reference_question")
        if reference is not None and not isinstance(reference, str):
            raise SchemaError(path, line_no, "reference_question", "must be a string")
        if example_id in seen:
            raise DuplicateId(f"{path}:{line_no}: id {example_id!r} already used on line {seen[example_id]}")
        seen[example_id] = line_no
        if manifest and manifest.expected_passages and len(passages) != manifest.expected_passages:
            raise PassageCountMismatch(
                f"{path}:{line_no}: example {example_id!r} has {len(passages)} passage(s), "
                f"manifest expects {manifest.expected_passages}"
            )
        examples.append(
            QGExample(
                id=example_id,
                passages=tuple(passages),
                answer=answer,
                clues=tuple(clues) if clues is not None else None,
                reference_question=reference,
                dataset_id=record.get("dataset_id", manifest.dataset_id if manifest else ""),
            )
        )
    return examples


def load_candidates(path: str | Path, examples: list[QGExample]) -> list[CandidateQuestion]:
    """Load a JSONL candidates file: ``{example_id, system, text}`` per line."""
    path = Path(path)
    known = {example.id for example in examples}
    candidates: list[CandidateQuestion] = []
    for line_no, record in _jsonl_records(path):
        example_id = _require(record, "example_id", str, path, line_no)
        system = _require(record, "system", str, path, line_no)
        text = _require(record, "text", str, path, line_no)
        if not text:
            raise SchemaError(path, line_no, "text", "must be non-empty")
        if example_id not in known:
            raise UnknownExampleId(f"{path}:{line_no}: unknown example id {example_id!r}")
        candidates.append(CandidateQuestion(example_id=example_id, text=text, system=system))
    return candidates


def load_human_ratings(path: str | Path) -> list[HumanRating]:
    """Load a JSONL ratings file: one rating per line with three 0-2 integers."""
    path = Path(path)
    ratings: list[HumanRating] = []
    for line_no, record in _jsonl_records(path):
        values = {}
        for key in ("naturalness", "answerability", "complexity"):
            value = _require(record, key, int, path, line_no)
            if value not in (0, 1, 2):
                raise SchemaError(path, line_no, key, f"rating {value} outside 0-2")
            values[key] = value
        ratings.append(
            HumanRating(
                example_id=_require(record, "example_id", str, path, line_no),
                system=_require(record, "system", str, path, line_no),
                rater_id=_require(record, "rater_id", str, path, line_no),
                **values,
            )
        )
    return ratings


def _meta_path(path: Path) -> Path:
    return path.with_name(path.name + ".meta.json")


def write_score_table(table: ScoreTable, path: str | Path, scale: float = 1.0) -> None:
    """Write the table as CSV (plus a provenance sidecar).

    ``scale`` multiplies cell values on the way out (1.0 or 100.0 for
    percent-style reports); it is recorded in the sidecar.
    """
    path = Path(path)
    metrics = table.metrics()
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["example_id", "system", *metrics])
        for example_id, system in table.rows():
            cells = []
            for metric in metrics:
                value = table.get(example_id, system, metric)
                cells.append("" if value is None else repr(value * scale))
            writer.writerow([example_id, system, *cells])
    meta = {
        "columns": {
            metric: {
                "provenance": table.provenance[metric].value,
                **({"fingerprint": table.fingerprints[metric]} if metric in table.fingerprints else {}),
            }
            for metric in metrics
        },
        "scale": scale,
    }
    _meta_path(path).write_text(json.dumps(meta, indent=2) + "\n", encoding="utf-8")


def read_score_table(path: str | Path) -> ScoreTable:
    """Read a score-table CSV; provenance is restored from the sidecar if present."""
    path = Path(path)
    meta_columns = {}
    meta_file = _meta_path(path)
    if meta_file.exists():
        meta_columns = json.loads(meta_file.read_text(encoding="utf-8")).get("columns", {})
    table = ScoreTable()
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if not header or header[:2] != ["example_id", "system"]:
            raise SchemaError(path, 1, None, "expected header starting 'example_id,system'")
        metrics = header[2:]
        # Register columns up front so header order survives sparse cells.
        for metric in metrics:
            provenance = Provenance(meta_columns.get(metric, {}).get("provenance", "ingested"))
            table.register_metric(metric, provenance)
        for line_no, row in enumerate(reader, start=2):
            if len(row) != len(header):
                raise SchemaError(path, line_no, None, f"expected {len(header)} fields, got {len(row)}")
            example_id, system, *cells = row
            for metric, cell in zip(metrics, cells):
                if cell == "":
                    continue
                try:
                    value = float(cell)
                except ValueError as err:
                    raise SchemaError(path, line_no, metric, f"cell {cell!r} is not a number") from err
                table.set_cell(example_id, system, metric, value)
    for metric, info in meta_columns.items():
        if "fingerprint" in info and metric in table.provenance:
            table.fingerprints[metric] = info["fingerprint"]
    return table
