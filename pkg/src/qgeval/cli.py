"""Operator-facing command surface.

Subcommands: calibrate, score, direct-eval (score --mode direct-eval),
baseline, correlate, groups, cache. Configuration is a flat JSON document;
precedence is flag > environment (QGEVAL_<KEY>) > config file > default.
Credentials are never stored in config files, only environment variable
names.

Batch runs schedule (candidate, run_index) jobs onto a bounded thread pool;
all writes funnel through one collector so output files are deterministic.
Per-candidate failures are soft: they land in a sidecar report and never
abort the batch. Exit status is nonzero only for hard errors.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass
from pathlib import Path

from .analysis import (
    DegenerateInput,
    aggregate_all_ratings,
    correlate,
    group_summary,
)
from .baselines import ScoreTable, bleu4, corpus_bleu4, ingest_external_scores, rouge_l
from .core import CandidateQuestion
from .io_datasets import (
    DatasetManifest,
    load_candidates,
    load_examples,
    load_human_ratings,
    read_score_table,
    write_score_table,
)
from .llm_gateway import (
    CompletionRequest,
    Gateway,
    GatewayError,
    GatewayLimits,
    HttpChatProvider,
    MockProvider,
    ModelConfig,
    ResponseCache,
)
from .prompts import (
    COT_QA_TEMPLATE_VERSION,
    DIRECT_EVAL_TEMPLATE_VERSION,
    PromptError,
    PromptMode,
    PromptRequest,
    build_cot_qa_prompt,
    build_direct_eval_prompt,
)
from .scoring import (
    CalibrationProfile,
    NoUsableTraces,
    ScoreConfig,
    aggregate_runs,
    calibrate_expected_complexity,
    evaluate_run,
)
from .trace_parser import (
    OutOfRange,
    ParseDegraded,
    ParseFailed,
    count_reasoning_steps,
    parse_cot_response,
    parse_direct_eval_response,
)

_DEFAULTS = {
    "provider": "mock",
    "model": "mock",
    "temperature": None,
    "max_output_tokens": 1024,
    "endpoint": "",
    "credential_ref": "",
    "mock_fixtures": None,
    "cache_root": ".qgeval_cache",
    "runs": 3,
    "seed": 0,
    "parallelism": 4,
    "scale": "unit",
    "calibration_sample": 750,
    "dataset_id": "",
    "expected_passages": None,
    "hierarchy": "or",
    "run_aggregation": "mean_of_final",
    "requery_degraded": False,
}

_CASTS = {
    "temperature": float,
    "max_output_tokens": int,
    "runs": int,
    "seed": int,
    "parallelism": int,
    "calibration_sample": int,
    "expected_passages": int,
    "requery_degraded": lambda v: str(v).lower() in ("1", "true", "yes"),
}


class CliError(Exception):
    """Hard error: bad configuration, unusable inputs, or a failed precondition."""


@dataclass
class Settings:
    """Resolved run configuration (see module docstring for precedence)."""

    values: dict

    def __getattr__(self, key):
        try:
            return self.values[key]
        except KeyError:
            raise AttributeError(key) from None


def resolve_settings(args: argparse.Namespace) -> Settings:
    file_cfg = {}
    config_path = getattr(args, "config", None)
    if config_path:
        try:
            file_cfg = json.loads(Path(config_path).read_text(encoding="utf-8"))
        except (OSError, ValueError) as err:
            raise CliError(f"cannot read config {config_path}: {err}") from err
        if not isinstance(file_cfg, dict):
            raise CliError(f"config {config_path} must be a flat JSON object")
    values = {}
    for key, default in _DEFAULTS.items():
        cast = _CASTS.get(key, lambda v: v)
        flag = getattr(args, key, None)
        env = os.environ.get(f"QGEVAL_{key.upper()}")
        if flag is not None:
            values[key] = flag
        elif env is not None:
            values[key] = cast(env)
        elif file_cfg.get(key) is not None:
            values[key] = cast(file_cfg[key])
        else:
            values[key] = default
    if values["parallelism"] < 1:
        raise CliError("parallelism must be >= 1")
    return Settings(values)


def build_model_config(settings: Settings) -> ModelConfig:
    return ModelConfig(
        provider_id=settings.provider,
        model_name=settings.model,
        temperature=settings.temperature,
        max_output_tokens=settings.max_output_tokens,
        endpoint=settings.endpoint,
        credential_ref=settings.credential_ref,
    )


def build_gateway(settings: Settings) -> Gateway:
    if settings.provider == "mock":
        if not settings.mock_fixtures:
            raise CliError("mock provider requires --mock-fixtures (a manifest file or fixture directory)")
        provider = MockProvider.from_path(settings.mock_fixtures)
    else:
        provider = HttpChatProvider()
    cache = ResponseCache(settings.cache_root)
    limits = GatewayLimits(max_concurrent=settings.parallelism)
    return Gateway(provider, cache=cache, limits=limits)


def _load_inputs(args, settings: Settings, need_candidates: bool = True):
    manifest = DatasetManifest(
        dataset_id=settings.dataset_id,
        examples_path=str(args.examples),
        expected_passages=settings.expected_passages,
    )
    examples = load_examples(args.examples, manifest)
    candidates = load_candidates(args.candidates, examples) if need_candidates else []
    return examples, candidates


def _score_config(settings: Settings) -> ScoreConfig:
    return ScoreConfig(
        runs=settings.runs,
        display_scale=settings.scale,
        hierarchy=settings.hierarchy,
        run_aggregation=settings.run_aggregation,
        requery_degraded=settings.requery_degraded,
    )


def _pool_map(jobs, fn, parallelism: int):
    """Run fn over jobs on a bounded pool; collect results and errors by job."""
    results, errors = {}, {}
    with ThreadPoolExecutor(max_workers=parallelism) as pool:
        futures = {pool.submit(fn, job): job for job in jobs}
        for future in as_completed(futures):
            job = futures[future]
            try:
                results[job] = future.result()
            except Exception as err:  # soft: collected per job
                errors[job] = err
    return results, errors


def _write_report(out_path: Path, payload: dict) -> None:
    report_path = out_path.with_name(out_path.name + ".report.json")
    report_path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _reference_trace_counts(examples, settings, gateway, model):
    """CoT traces for each example's reference question (one run each)."""
    refs = {e.id: e for e in examples if e.reference_question}

    def job_fn(example_id: str):
        example = refs[example_id]
        reference = CandidateQuestion(example_id=example.id, text=example.reference_question, system="reference")
        prompt = build_cot_qa_prompt(PromptRequest(example=example, candidate=reference, mode=PromptMode.COT_QA))
        raw = gateway.cached_complete(CompletionRequest(config=model, prompt=prompt, run_index=0))
        try:
            return parse_cot_response(raw)
        except ParseDegraded as err:
            return err.trace

    traces, errors = _pool_map(sorted(refs), job_fn, settings.parallelism)
    return traces, errors


def cmd_calibrate(args) -> int:
    settings = resolve_settings(args)
    examples, _ = _load_inputs(args, settings, need_candidates=False)
    refs = [e for e in examples if e.reference_question]
    if not refs:
        raise CliError(f"{args.examples}: no example has a reference question; cannot calibrate")
    refs = refs[: settings.calibration_sample]

    model = build_model_config(settings)
    gateway = build_gateway(settings)
    traces, errors = _reference_trace_counts(refs, settings, gateway, model)
    for example_id in sorted(errors):
        print(f"calibrate: example {example_id}: {errors[example_id]}", file=sys.stderr)

    dataset_id = settings.dataset_id or refs[0].dataset_id or "dataset"
    profile = calibrate_expected_complexity(
        [traces[k] for k in sorted(traces)],
        dataset_id=dataset_id,
        prompt_template_version=COT_QA_TEMPLATE_VERSION,
        model_name=model.model_name,
    )
    profile.save(args.out)
    print(f"calibrated {dataset_id}: expected_complexity={profile.expected_complexity} "
          f"from {profile.sample_size} reference(s), histogram={profile.histogram}")
    print(f"wrote {args.out}")
    return 0


_COT_COLUMNS = ("naco", "n_cand", "a_cand", "c_cand", "c_cand_abs")
_DIRECT_COLUMNS = ("direct_naturalness", "direct_answerability", "direct_complexity", "direct_total")


def _score_cot(args, settings, examples, candidates, config, gateway, model):
    by_id = {e.id: e for e in examples}
    if getattr(args, "override_expected_from_reference", False):
        needed = {c.example_id for c in candidates}
        missing = sorted(e for e in needed if not by_id[e].reference_question)
        if missing:
            raise CliError(f"--override-expected-from-reference: no reference question for {missing}")
        ref_traces, ref_errors = _reference_trace_counts(
            [by_id[e] for e in sorted(needed)], settings, gateway, model
        )
        if ref_errors:
            raise CliError(f"reference runs failed for {sorted(ref_errors)}")
        expected = {}
        for example_id, trace in ref_traces.items():
            steps = count_reasoning_steps(trace)
            if steps < 1:
                raise CliError(f"reference for {example_id} yielded no countable steps")
            expected[example_id] = steps
        expected_source = "reference-override"
    else:
        if not args.profile:
            raise CliError("score needs --profile (or --override-expected-from-reference)")
        profile = CalibrationProfile.load(args.profile)
        expected = {e.id: profile.expected_complexity for e in examples}
        expected_source = f"profile:{profile.dataset_id}"

    jobs = [(i, run) for i in range(len(candidates)) for run in range(config.runs)]

    def job_fn(job):
        i, run = job
        candidate = candidates[i]
        return evaluate_run(by_id[candidate.example_id], candidate, run, expected[candidate.example_id],
                            config, gateway, model)

    results, errors = _pool_map(jobs, job_fn, settings.parallelism)

    table = ScoreTable()
    for column in _COT_COLUMNS:
        table.register_metric(column)
    factor = 100.0 if config.display_scale == "percent" else 1.0
    failures = []
    for i, candidate in enumerate(candidates):
        run_errors = [errors[(i, run)] for run in range(config.runs) if (i, run) in errors]
        if run_errors:
            failures.append({
                "example_id": candidate.example_id,
                "system": candidate.system,
                "error": type(run_errors[0]).__name__,
                "message": str(run_errors[0]),
            })
            continue
        scores = aggregate_runs([results[(i, run)] for run in range(config.runs)], config)
        key = (candidate.example_id, candidate.system)
        table.set_cell(*key, "naco", scores.naco * factor)
        table.set_cell(*key, "n_cand", scores.n_cand * factor)
        table.set_cell(*key, "a_cand", scores.a_cand * factor)
        table.set_cell(*key, "c_cand", scores.c_cand * factor)
        table.set_cell(*key, "c_cand_abs", scores.c_cand_abs)  # a step count; never rescaled
    return table, failures, expected_source


def _score_direct(args, settings, examples, candidates, config, gateway, model):
    by_id = {e.id: e for e in examples}
    append_reference = getattr(args, "append_reference", False)
    if append_reference and not any(e.reference_question for e in examples):
        raise CliError("--append-reference: no example has a reference question")

    jobs = [(i, run) for i in range(len(candidates)) for run in range(config.runs)]

    def job_fn(job):
        i, run = job
        candidate = candidates[i]
        prompt = build_direct_eval_prompt(PromptRequest(
            example=by_id[candidate.example_id],
            candidate=candidate,
            mode=PromptMode.DIRECT_EVAL,
            append_reference=append_reference,
        ))
        raw = gateway.cached_complete(CompletionRequest(config=model, prompt=prompt, run_index=run))
        return parse_direct_eval_response(raw)

    results, errors = _pool_map(jobs, job_fn, settings.parallelism)

    table = ScoreTable()
    for column in _DIRECT_COLUMNS:
        table.register_metric(column)
    failures = []
    for i, candidate in enumerate(candidates):
        run_errors = [errors[(i, run)] for run in range(config.runs) if (i, run) in errors]
        if run_errors:
            failures.append({
                "example_id": candidate.example_id,
                "system": candidate.system,
                "error": type(run_errors[0]).__name__,
                "message": str(run_errors[0]),
            })
            continue
        scores = [results[(i, run)] for run in range(config.runs)]
        key = (candidate.example_id, candidate.system)
        table.set_cell(*key, "direct_naturalness", sum(s.naturalness for s in scores) / len(scores))
        table.set_cell(*key, "direct_answerability", sum(s.answerability for s in scores) / len(scores))
        table.set_cell(*key, "direct_complexity", sum(s.complexity for s in scores) / len(scores))
        table.set_cell(*key, "direct_total", sum(s.total for s in scores) / len(scores))
    return table, failures, "direct-eval"


def cmd_score(args, forced_mode: str | None = None) -> int:
    settings = resolve_settings(args)
    examples, candidates = _load_inputs(args, settings)
    config = _score_config(settings)
    model = build_model_config(settings)
    gateway = build_gateway(settings)

    mode = forced_mode or getattr(args, "mode", "cot-qa")
    if mode == "direct-eval":
        table, failures, source = _score_direct(args, settings, examples, candidates, config, gateway, model)
        template_version = DIRECT_EVAL_TEMPLATE_VERSION
    else:
        table, failures, source = _score_cot(args, settings, examples, candidates, config, gateway, model)
        template_version = COT_QA_TEMPLATE_VERSION

    out = Path(args.out)
    write_score_table(table, out)
    _write_report(out, {
        "command": "score",
        "mode": mode,
        "rows": len(table.rows()),
        "candidates": len(candidates),
        "runs": config.runs,
        "failures": sorted(failures, key=lambda f: (f["example_id"], f["system"])),
        "provider_calls": gateway.provider_calls,
        "cache_hits": gateway.cache_hits,
        "prompt_template_version": template_version,
        "model_name": model.model_name,
        "scale": config.display_scale,
        "expected_complexity_source": source,
    })
    print(f"scored {len(table.rows())}/{len(candidates)} candidate(s) -> {out} "
          f"({gateway.provider_calls} provider call(s), {gateway.cache_hits} cache hit(s))")
    if failures:
        print(f"{len(failures)} candidate(s) failed; see {out}.report.json", file=sys.stderr)
    return 0


def cmd_baseline(args) -> int:
    settings = resolve_settings(args)
    examples, candidates = _load_inputs(args, settings)
    out = Path(args.out)
    table = read_score_table(out) if out.exists() else ScoreTable()

    if args.ingest:
        metric = args.metric_name or Path(args.ingest).stem
        table.drop_column(metric)
        report = ingest_external_scores(table, args.ingest, metric)
        write_score_table(table, out)
        print(f"ingested {report.rows_added} row(s) as {metric!r} (fingerprint {report.fingerprint}) -> {out}")
        if report.missing_ids:
            print(f"coverage gap: {len(report.missing_ids)} candidate(s) missing", file=sys.stderr)
        return 0

    metric = args.metric
    by_id = {e.id: e for e in examples}
    with_ref = [c for c in candidates if by_id[c.example_id].reference_question]
    if not with_ref:
        raise CliError(f"{args.examples}: no candidate has a reference question to score against")
    failures = [
        {"example_id": c.example_id, "system": c.system, "error": "MissingReference",
         "message": "example has no reference question"}
        for c in candidates
        if not by_id[c.example_id].reference_question
    ]
    table.drop_column(metric)
    for candidate in with_ref:
        reference = by_id[candidate.example_id].reference_question
        value = bleu4(candidate.text, [reference]) if metric == "bleu4" else rouge_l(candidate.text, reference)
        table.set_cell(candidate.example_id, candidate.system, metric, value)
    write_score_table(table, out)

    payload = {
        "command": "baseline",
        "metric": metric,
        "rows": len(with_ref),
        "failures": failures,
    }
    if metric == "bleu4":
        by_system: dict[str, list[CandidateQuestion]] = {}
        for candidate in with_ref:
            by_system.setdefault(candidate.system, []).append(candidate)
        payload["corpus_bleu4"] = {
            system: corpus_bleu4(
                [c.text for c in group],
                [[by_id[c.example_id].reference_question] for c in group],
            )
            for system, group in sorted(by_system.items())
        }
    _write_report(out, payload)
    print(f"baseline {metric}: {len(with_ref)} candidate(s) -> {out}")
    return 0


_TARGETS = ("naturalness", "answerability", "complexity", "overall")


def cmd_correlate(args) -> int:
    table = read_score_table(args.table)
    aggregated = aggregate_all_ratings(load_human_ratings(args.ratings))
    target_values = {
        "naturalness": {(a.example_id, a.system): a.mean_naturalness for a in aggregated},
        "answerability": {(a.example_id, a.system): a.mean_answerability for a in aggregated},
        "complexity": {(a.example_id, a.system): a.mean_complexity for a in aggregated},
        "overall": {(a.example_id, a.system): a.mean_total for a in aggregated},
    }

    out = Path(args.out)
    lines = []
    notes = []
    rows = []
    for metric in table.metrics():
        column = table.column(metric)
        for target in _TARGETS:
            targets = target_values[target]
            keys = sorted(set(column) & set(targets))
            xs = [column[k] for k in keys]
            ys = [targets[k] for k in keys]
            try:
                report = correlate(xs, ys, metric, target)
            except DegenerateInput as err:
                notes.append(f"{metric} vs {target}: skipped ({err})")
                rows.append([metric, target, len(keys), "", "", ""])
                continue
            rows.append([metric, target, report.n,
                         repr(report.pearson_r), repr(report.spearman_rho), repr(report.kendall_tau)])
            lines.append(f"{metric:>24s} vs {target:<14s} r={report.pearson_r:+.4f} "
                         f"rho={report.spearman_rho:+.4f} tau={report.kendall_tau:+.4f} (n={report.n})")

    with out.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["metric", "target", "n", "pearson_r", "spearman_rho", "kendall_tau"])
        writer.writerows(rows)
    summary = out.with_suffix(".txt")
    summary.write_text(
        "Correlation of metric columns with mean human ratings\n"
        "(overall = sum of the three mean criterion ratings)\n\n"
        + "\n".join(lines)
        + ("\n\nnotes:\n" + "\n".join(notes) if notes else "")
        + "\n",
        encoding="utf-8",
    )
    print(f"wrote {out} and {summary}")
    return 0


def cmd_groups(args) -> int:
    table = read_score_table(args.table)
    groups = None
    if args.group_map:
        groups = json.loads(Path(args.group_map).read_text(encoding="utf-8"))
    summary = group_summary(table, groups)

    out = Path(args.out)
    with out.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["group", "n", *table.metrics()])
        for group in sorted(summary.means):
            row = [group, summary.sizes[group]]
            row += [repr(summary.means[group][m]) if m in summary.means[group] else "" for m in table.metrics()]
            writer.writerow(row)

    lines = ["Per-group metric means", ""]
    for group in sorted(summary.means):
        means = ", ".join(f"{m}={summary.means[group][m]:.4f}" for m in table.metrics()
                          if m in summary.means[group])
        lines.append(f"{group} (n={summary.sizes[group]}): {means}")
    lines += ["", "Pairwise mean gaps (first minus second)"]
    for (a, b), gaps in sorted(summary.gaps.items()):
        gap_text = ", ".join(f"{m}={gaps[m]:+.4f}" for m in table.metrics() if m in gaps)
        lines.append(f"{a} - {b}: {gap_text}")
    out.with_suffix(".txt").write_text("\n".join(lines) + "\n", encoding="utf-8")
    print(f"wrote {out} and {out.with_suffix('.txt')}")
    return 0


def cmd_cache(args) -> int:
    settings = resolve_settings(args)
    cache = ResponseCache(settings.cache_root)
    if args.action == "stats":
        stats = cache.stats()
        print(f"cache {settings.cache_root}: {stats['entries']} entrie(s), {stats['bytes']} byte(s)")
    else:
        removed = cache.clear()
        print(f"cache {settings.cache_root}: removed {removed} entrie(s)")
    return 0


def _add_common_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="flat JSON config file")
    parser.add_argument("--provider", help="provider id ('mock' or an HTTP provider label)")
    parser.add_argument("--model", help="model name")
    parser.add_argument("--mock-fixtures", dest="mock_fixtures",
                        help="mock provider fixtures: manifest file or digest directory")
    parser.add_argument("--cache-root", dest="cache_root", help="response cache directory")
    parser.add_argument("--runs", type=int, help="independent runs per candidate (default 3)")
    parser.add_argument("--seed", type=int, help="random seed for sampling operations")
    parser.add_argument("--parallelism", type=int, help="worker pool size (default 4)")
    parser.add_argument("--scale", choices=("unit", "percent"), help="report scale for unit-interval scores")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qgeval",
        description="Reference-free question-generation evaluation toolkit.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("calibrate", help="compute a dataset's expected complexity from reference questions")
    p.add_argument("--examples", required=True)
    p.add_argument("--out", required=True, help="output profile JSON path")
    p.add_argument("--sample", dest="calibration_sample", type=int,
                   help="max reference questions to use (default 750)")
    p.add_argument("--dataset-id", dest="dataset_id")
    _add_common_flags(p)
    p.set_defaults(fn=cmd_calibrate)

    for name, forced in (("score", None), ("direct-eval", "direct-eval")):
        p = sub.add_parser(name, help="score candidates" if not forced else "score with the rubric-rating mode")
        p.add_argument("--examples", required=True)
        p.add_argument("--candidates", required=True)
        p.add_argument("--out", required=True, help="output score table CSV path")
        p.add_argument("--profile", help="calibration profile JSON")
        if not forced:
            p.add_argument("--mode", choices=("cot-qa", "direct-eval"), default="cot-qa")
        p.add_argument("--override-expected-from-reference", action="store_true",
                       dest="override_expected_from_reference",
                       help="use each reference question's own step count as the expected complexity")
        p.add_argument("--append-reference", action="store_true", dest="append_reference",
                       help="direct-eval only: append the reference question to the instruction")
        _add_common_flags(p)
        p.set_defaults(fn=cmd_score, forced_mode=forced)

    p = sub.add_parser("baseline", help="compute reference-based baselines or ingest external scores")
    p.add_argument("--examples", required=True)
    p.add_argument("--candidates", required=True)
    p.add_argument("--out", required=True, help="score table CSV (created or extended)")
    p.add_argument("--metric", choices=("bleu4", "rouge_l"), default="bleu4")
    p.add_argument("--ingest", help="CSV of externally computed scores (example_id,system,score)")
    p.add_argument("--metric-name", dest="metric_name", help="column name for --ingest")
    _add_common_flags(p)
    p.set_defaults(fn=cmd_baseline)

    p = sub.add_parser("correlate", help="correlate score-table columns with human ratings")
    p.add_argument("--table", required=True)
    p.add_argument("--ratings", required=True)
    p.add_argument("--out", required=True, help="output correlations CSV path")
    _add_common_flags(p)
    p.set_defaults(fn=cmd_correlate)

    p = sub.add_parser("groups", help="per-group metric means and pairwise gaps")
    p.add_argument("--table", required=True)
    p.add_argument("--out", required=True, help="output group means CSV path")
    p.add_argument("--group-map", dest="group_map", help="JSON file mapping system -> group tag")
    _add_common_flags(p)
    p.set_defaults(fn=cmd_groups)

    p = sub.add_parser("cache", help="response cache maintenance")
    p.add_argument("action", choices=("stats", "clear"))
    _add_common_flags(p)
    p.set_defaults(fn=cmd_cache)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if getattr(args, "forced_mode", None):
            return args.fn(args, forced_mode=args.forced_mode)
        return args.fn(args)
    except (CliError, NoUsableTraces, GatewayError, PromptError, ParseFailed, OutOfRange) as err:
        print(f"error: {err}", file=sys.stderr)
        return 1
    except (OSError, ValueError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
