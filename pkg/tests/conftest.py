from __future__ import annotations

import pytest

from actisum.corpus import Document, LabeledExample, write_corpus
from actisum.synth import generate_corpus, generate_test_corpus


@pytest.fixture(scope="session")
def synth_corpus():
    """The standard 2000-document mixed-class pool used across the suite."""
    return generate_corpus(2000, seed=0)


@pytest.fixture(scope="session")
def synth_test_path(tmp_path_factory):
    docs = generate_test_corpus(300, seed=99)
    path = tmp_path_factory.mktemp("synth") / "test.jsonl"
    write_corpus(docs, path)
    return str(path)


@pytest.fixture
def small_corpus():
    """Ten labeled documents over two topics, handy for pool mechanics."""
    docs = []
    for i in range(10):
        topic = "alpha" if i % 2 == 0 else "beta"
        docs.append(
            Document(
                id=f"d{i:02d}",
                text=f"{topic} fact number {i}. padding sentence {i}.",
                reference=f"{topic} fact",
            )
        )
    return docs
