import shutil
from pathlib import Path

import pytest

from qgeval.cli import main

REPO = Path(__file__).resolve().parent.parent
DEMO = REPO / "demo"
DATA = Path(__file__).resolve().parent / "data"


@pytest.fixture
def demo_paths():
    return {
        "examples": str(DEMO / "examples.jsonl"),
        "candidates": str(DEMO / "candidates.jsonl"),
        "ratings": str(DEMO / "ratings.jsonl"),
        "manifest": str(DEMO / "mock_manifest.json"),
    }


@pytest.fixture
def run_cli(tmp_path):
    """Invoke the CLI entry point with an isolated cache root."""
    cache_root = tmp_path / "cache"

    def run(*argv, cache=True):
        argv = list(argv)
        if cache and "--cache-root" not in argv:
            argv += ["--cache-root", str(cache_root)]
        return main(argv)

    run.cache_root = cache_root
    run.tmp = tmp_path
    return run


@pytest.fixture
def scored_demo(run_cli, demo_paths, tmp_path):
    """Calibrate and score the demo dataset once; returns output paths."""
    profile = tmp_path / "profile.json"
    scores = tmp_path / "scores.csv"
    assert run_cli(
        "calibrate", "--examples", demo_paths["examples"], "--out", str(profile),
        "--mock-fixtures", demo_paths["manifest"], "--dataset-id", "demo",
    ) == 0
    assert run_cli(
        "score", "--examples", demo_paths["examples"], "--candidates", demo_paths["candidates"],
        "--profile", str(profile), "--out", str(scores),
        "--mock-fixtures", demo_paths["manifest"],
    ) == 0
    return {"profile": profile, "scores": scores}


@pytest.fixture(autouse=True)
def _no_qgeval_env(monkeypatch):
    """Keep ambient QGEVAL_* variables from leaking into tests."""
    import os

    for key in list(os.environ):
        if key.startswith("QGEVAL_"):
            monkeypatch.delenv(key)
