import json

import pytest
from hypothesis import given
from hypothesis import strategies as st

from qgeval.baselines import Provenance, ScoreTable
from qgeval.io_datasets import (
    DatasetManifest,
    DuplicateId,
    PassageCountMismatch,
    SchemaError,
    UnknownExampleId,
    load_candidates,
    load_examples,
    load_human_ratings,
    read_score_table,
    write_score_table,
)


def write_jsonl(path, records):
    path.write_text("\n".join(json.dumps(r) for r in records) + "\n", encoding="utf-8")
    return path


def example_record(i, passages=1):
    return {
        "id": f"e{i}",
        "passages": [f"passage {i}.{j}" for j in range(passages)],
        "answer": f"answer {i}",
        "reference_question": f"reference {i}?",
        "dataset_id": "t",
    }


class TestLoadExamples:
    def test_well_formed(self, tmp_path):
        path = write_jsonl(tmp_path / "ex.jsonl", [example_record(i) for i in range(3)])
        examples = load_examples(path)
        assert len(examples) == 3
        assert examples[0].id == "e0"
        assert examples[0].passages == ("passage 0.0",)

    def test_missing_answer_names_line_and_field(self, tmp_path):
        records = [example_record(0), {"id": "e1", "passages": ["p"]}]
        path = write_jsonl(tmp_path / "ex.jsonl", records)
        with pytest.raises(SchemaError) as exc_info:
            load_examples(path)
        assert exc_info.value.line_no == 2
        assert exc_info.value.field == "answer"

    def test_duplicate_id(self, tmp_path):
        path = write_jsonl(tmp_path / "ex.jsonl", [example_record(0), example_record(0)])
        with pytest.raises(DuplicateId):
            load_examples(path)

    def test_passage_count_mismatch(self, tmp_path):
        path = write_jsonl(tmp_path / "ex.jsonl", [example_record(0, passages=1)])
        manifest = DatasetManifest(dataset_id="t", expected_passages=2)
        with pytest.raises(PassageCountMismatch):
            load_examples(path, manifest)

    def test_three_passages_rejected(self, tmp_path):
        path = write_jsonl(tmp_path / "ex.jsonl", [example_record(0, passages=3)])
        with pytest.raises(SchemaError):
            load_examples(path)

    def test_invalid_json_line(self, tmp_path):
        path = tmp_path / "ex.jsonl"
        path.write_text('{"id": "e0"\n', encoding="utf-8")
        with pytest.raises(SchemaError) as exc_info:
            load_examples(path)
        assert exc_info.value.line_no == 1

    def test_manifest_dataset_id_fallback(self, tmp_path):
        record = example_record(0)
        del record["dataset_id"]
        path = write_jsonl(tmp_path / "ex.jsonl", [record])
        examples = load_examples(path, DatasetManifest(dataset_id="fallback"))
        assert examples[0].dataset_id == "fallback"

    def test_blank_lines_skipped(self, tmp_path):
        path = tmp_path / "ex.jsonl"
        path.write_text(json.dumps(example_record(0)) + "\n\n" + json.dumps(example_record(1)) + "\n")
        assert len(load_examples(path)) == 2


class TestLoadCandidates:
    def test_multiple_systems(self, tmp_path):
        examples = load_examples(write_jsonl(tmp_path / "ex.jsonl", [example_record(i) for i in range(3)]))
        records = [
            {"example_id": f"e{i}", "system": system, "text": f"question {system} {i}?"}
            for system in ("s1", "s2")
            for i in range(3)
        ]
        candidates = load_candidates(write_jsonl(tmp_path / "cand.jsonl", records), examples)
        assert len(candidates) == 6

    def test_unknown_example_id(self, tmp_path):
        examples = load_examples(write_jsonl(tmp_path / "ex.jsonl", [example_record(0)]))
        path = write_jsonl(tmp_path / "cand.jsonl", [{"example_id": "nope", "system": "s", "text": "q?"}])
        with pytest.raises(UnknownExampleId):
            load_candidates(path, examples)

    def test_empty_file_is_valid(self, tmp_path):
        examples = load_examples(write_jsonl(tmp_path / "ex.jsonl", [example_record(0)]))
        path = tmp_path / "cand.jsonl"
        path.write_text("", encoding="utf-8")
        assert load_candidates(path, examples) == []

    def test_empty_text_rejected(self, tmp_path):
        examples = load_examples(write_jsonl(tmp_path / "ex.jsonl", [example_record(0)]))
        path = write_jsonl(tmp_path / "cand.jsonl", [{"example_id": "e0", "system": "s", "text": ""}])
        with pytest.raises(SchemaError):
            load_candidates(path, examples)


class TestLoadHumanRatings:
    def test_well_formed(self, tmp_path):
        path = write_jsonl(tmp_path / "r.jsonl", [
            {"example_id": "e0", "system": "s", "rater_id": "r1",
             "naturalness": 2, "answerability": 1, "complexity": 0},
        ])
        ratings = load_human_ratings(path)
        assert ratings[0].naturalness == 2

    def test_out_of_range_rating(self, tmp_path):
        path = write_jsonl(tmp_path / "r.jsonl", [
            {"example_id": "e0", "system": "s", "rater_id": "r1",
             "naturalness": 5, "answerability": 1, "complexity": 0},
        ])
        with pytest.raises(SchemaError):
            load_human_ratings(path)

    def test_float_rating_rejected(self, tmp_path):
        path = write_jsonl(tmp_path / "r.jsonl", [
            {"example_id": "e0", "system": "s", "rater_id": "r1",
             "naturalness": 1.5, "answerability": 1, "complexity": 0},
        ])
        with pytest.raises(SchemaError):
            load_human_ratings(path)


metric_names = st.lists(
    st.sampled_from(["naco", "bleu4", "rouge_l", "bertscore", "n_cand"]), unique=True, min_size=1, max_size=4
)
cell_values = st.floats(min_value=-1e6, max_value=1e6, allow_nan=False)


class TestScoreTableRoundTrip:
    def test_write_then_read_equal(self, tmp_path):
        table = ScoreTable()
        table.set_cell("e1", "s1", "naco", 0.8333333333333334)
        table.set_cell("e1", "s1", "bleu4", 0.1, provenance=Provenance.NATIVE)
        table.set_cell("e2", "s1", "naco", 1 / 3)
        table.fingerprints["bleu4"] = "abc123"
        path = tmp_path / "t.csv"
        write_score_table(table, path)
        loaded = read_score_table(path)
        assert loaded.rows() == table.rows()
        assert loaded.metrics() == table.metrics()
        for key in table.rows():
            for metric in table.metrics():
                assert loaded.get(*key, metric) == table.get(*key, metric)
        assert loaded.provenance == table.provenance
        assert loaded.fingerprints == table.fingerprints

    def test_unknown_column_defaults_to_ingested(self, tmp_path):
        path = tmp_path / "t.csv"
        path.write_text("example_id,system,mystery\ne1,s1,0.5\n", encoding="utf-8")
        table = read_score_table(path)
        assert table.provenance["mystery"] is Provenance.INGESTED
        assert table.get("e1", "s1", "mystery") == 0.5

    def test_truncated_row(self, tmp_path):
        path = tmp_path / "t.csv"
        path.write_text("example_id,system,naco\ne1,s1\n", encoding="utf-8")
        with pytest.raises(SchemaError):
            read_score_table(path)

    def test_bad_header(self, tmp_path):
        path = tmp_path / "t.csv"
        path.write_text("id,system,naco\ne1,s1,0.5\n", encoding="utf-8")
        with pytest.raises(SchemaError):
            read_score_table(path)

    def test_non_numeric_cell(self, tmp_path):
        path = tmp_path / "t.csv"
        path.write_text("example_id,system,naco\ne1,s1,zebra\n", encoding="utf-8")
        with pytest.raises(SchemaError):
            read_score_table(path)

    def test_missing_cells_survive(self, tmp_path):
        table = ScoreTable()
        table.set_cell("e1", "s1", "naco", 0.5)
        table.set_cell("e2", "s1", "bleu4", 0.1)
        path = tmp_path / "t.csv"
        write_score_table(table, path)
        loaded = read_score_table(path)
        assert loaded.get("e1", "s1", "bleu4") is None
        assert loaded.get("e2", "s1", "naco") is None
        assert loaded.get("e2", "s1", "bleu4") == 0.1

    @given(
        metrics=metric_names,
        rows=st.lists(st.tuples(st.sampled_from(["e1", "e2", "e3"]), st.sampled_from(["s1", "s2"])),
                      unique=True, min_size=1, max_size=6),
        data=st.data(),
    )
    def test_round_trip_property(self, tmp_path_factory, metrics, rows, data):
        table = ScoreTable()
        for metric in metrics:
            table.register_metric(metric)
        for key in rows:
            for metric in metrics:
                if data.draw(st.booleans()):
                    table.set_cell(*key, metric, data.draw(cell_values))
        path = tmp_path_factory.mktemp("tables") / "t.csv"
        write_score_table(table, path)
        loaded = read_score_table(path)
        assert loaded.metrics() == table.metrics()
        assert loaded.rows() == table.rows()
        for key in table.rows():
            for metric in metrics:
                assert loaded.get(*key, metric) == table.get(*key, metric)

    def test_scale_applied_on_write(self, tmp_path):
        table = ScoreTable()
        table.set_cell("e1", "s1", "naco", 0.5)
        path = tmp_path / "t.csv"
        write_score_table(table, path, scale=100.0)
        assert read_score_table(path).get("e1", "s1", "naco") == 50.0
