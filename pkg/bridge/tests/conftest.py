"""The conformance tests replay the golden transcripts shipped with the
engine package, whose test harness lives in the sibling checkout; make it
importable here."""

from __future__ import annotations

import sys
from pathlib import Path

import pytest

ENGINE_TESTS = Path(__file__).resolve().parents[2] / "tests"
sys.path.insert(0, str(ENGINE_TESTS))

DATA = Path(__file__).resolve().parent / "data"


@pytest.fixture(scope="session")
def news_corpus_path() -> Path:
    return DATA / "news50.jsonl"


@pytest.fixture(scope="session")
def checkpoint_dir(news_corpus_path, tmp_path_factory) -> Path:
    from bridge.make_checkpoint import build_checkpoint

    out = tmp_path_factory.mktemp("ckpt")
    build_checkpoint(news_corpus_path, out)
    return out
