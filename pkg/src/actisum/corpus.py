"""Dataset ingestion and pool bookkeeping.

Annotation is simulated: each document may carry a hidden reference summary
that is revealed when the document is moved into the labeled set. Documents
with empty text are legal (they exercise the noise filter downstream) and are
only flagged, never rejected.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Optional

import numpy as np

from actisum.errors import (
    ConfigError,
    CorpusError,
    InvalidAcquisitionError,
    MissingLabelError,
)


@dataclass(frozen=True)
class Document:
    id: str
    text: str
    reference: Optional[str] = None

    @property
    def is_empty(self) -> bool:
        return not self.text.strip()


@dataclass(frozen=True)
class LabeledExample:
    doc_id: str
    text: str
    summary: str


@dataclass
class PoolState:
    """Disjoint unlabeled / labeled / validation split with budget counters.

    `unlabeled` preserves corpus order, which makes index-based sampling
    deterministic for a fixed seed. Only a single driver may mutate the pool;
    concurrent reads are fine.
    """

    unlabeled: dict[str, Document]
    labeled: list[LabeledExample] = field(default_factory=list)
    validation: list[LabeledExample] = field(default_factory=list)
    budget: int = 0
    warm_start_size: int = 0

    @property
    def unlabeled_size(self) -> int:
        return len(self.unlabeled)

    @property
    def labeled_size(self) -> int:
        return len(self.labeled)

    @property
    def labeled_ids(self) -> set[str]:
        return {ex.doc_id for ex in self.labeled}

    @property
    def validation_ids(self) -> set[str]:
        return {ex.doc_id for ex in self.validation}


def load_corpus(path: str) -> list[Document]:
    """Read a line-delimited corpus file: one JSON record per line with string
    fields `id`, `text` and optional `summary`. Duplicate ids are rejected."""
    docs: list[Document] = []
    seen: set[str] = set()
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusError(f"{path}: line {lineno}: malformed record: {exc}") from exc
            if not isinstance(record, dict):
                raise CorpusError(f"{path}: line {lineno}: record must be an object")
            doc_id = record.get("id")
            text = record.get("text")
            summary = record.get("summary")
            if not isinstance(doc_id, str) or not isinstance(text, str):
                raise CorpusError(f"{path}: line {lineno}: `id` and `text` must be strings")
            if summary is not None and not isinstance(summary, str):
                raise CorpusError(f"{path}: line {lineno}: `summary` must be a string when present")
            if doc_id in seen:
                raise CorpusError(f"{path}: line {lineno}: duplicate id {doc_id!r}")
            seen.add(doc_id)
            docs.append(Document(id=doc_id, text=text, reference=summary))
    return docs


def write_corpus(docs: Iterable[Document], path) -> None:
    """Write documents in the same line-delimited format load_corpus reads."""
    with open(path, "w", encoding="utf-8") as fh:
        for doc in docs:
            record = {"id": doc.id, "text": doc.text}
            if doc.reference is not None:
                record["summary"] = doc.reference
            fh.write(json.dumps(record, ensure_ascii=False) + "\n")


def _reveal(doc: Document) -> LabeledExample:
    if doc.reference is None:
        raise MissingLabelError(f"document {doc.id!r} has no reference summary")
    return LabeledExample(doc_id=doc.id, text=doc.text, summary=doc.reference)


def initialize_pool(
    corpus: list[Document],
    v: int,
    s0: int,
    seed: int,
    budget: int = 0,
) -> PoolState:
    """Split a corpus into unlabeled pool, validation set and warm-start
    labeled set. The validation sample is drawn first, then the warm-start
    sample; both are uniform without replacement and removed from the pool."""
    if v < 0 or s0 < 0:
        raise ConfigError(f"v and s0 must be non-negative, got v={v}, s0={s0}")
    if v + s0 > len(corpus):
        raise ConfigError(f"v + s0 = {v + s0} exceeds corpus size {len(corpus)}")
    pool = PoolState(
        unlabeled={doc.id: doc for doc in corpus},
        budget=budget,
        warm_start_size=s0,
    )
    if len(pool.unlabeled) != len(corpus):
        raise CorpusError("corpus contains duplicate ids")
    if v + s0 > 0:
        rng = np.random.default_rng(seed)
        picks = rng.choice(len(corpus), size=v + s0, replace=False)
        val_docs = [corpus[i] for i in picks[:v]]
        warm_docs = [corpus[i] for i in picks[v:]]
        pool.validation = [_reveal(doc) for doc in val_docs]
        for doc in val_docs:
            del pool.unlabeled[doc.id]
        pool.labeled = [_reveal(doc) for doc in warm_docs]
        for doc in warm_docs:
            del pool.unlabeled[doc.id]
    return pool


def annotate(pool: PoolState, ids: Iterable[str]) -> PoolState:
    """Move documents from the unlabeled pool into the labeled set, revealing
    their references. Validates every id before mutating, so a failure leaves
    the pool untouched. The labeled list keeps acquisition order."""
    id_list = list(ids)
    revealed = []
    for doc_id in id_list:
        doc = pool.unlabeled.get(doc_id)
        if doc is None:
            raise InvalidAcquisitionError(f"document {doc_id!r} is not in the unlabeled pool")
        revealed.append(_reveal(doc))
    for doc_id, example in zip(id_list, revealed):
        del pool.unlabeled[doc_id]
        pool.labeled.append(example)
    return pool


def sample_candidates(pool: PoolState, k: int, seed: int) -> list[Document]:
    """Uniform sample without replacement of min(k, u) documents from the
    unlabeled pool; k larger than the pool degrades to the whole pool."""
    docs = list(pool.unlabeled.values())
    m = min(max(k, 0), len(docs))
    if m == 0:
        return []
    rng = np.random.default_rng(seed)
    picks = rng.choice(len(docs), size=m, replace=False)
    return [docs[i] for i in picks]
