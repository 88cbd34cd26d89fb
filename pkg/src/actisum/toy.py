"""Deterministic extractive learner used for desk-scale runs and tests.

The model is a token salience table fitted from labeled pairs: a token that
shows up in reference summaries often, relative to how often it shows up in
document texts, is considered salient. Summarization picks the sentence with
the highest mean salience. Stochastic generation masks a random subset of the
vocabulary before scoring, the cheap stand-in for sampling a model posterior:
documents the table knows nothing about collapse to all-zero scores and a
random tie-break, so repeated samples disagree and uncertainty shows up where
it should.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np

from actisum.corpus import LabeledExample
from actisum.errors import LearnerContractError
from actisum.metrics import tokenize
from actisum.protocol import Learner, LearnerConfig, ModelHandle, StochasticBatch
from actisum.seeding import subsample_seed

_SENTENCE_BREAKS = ".?!"


def split_sentences(text: str) -> list[str]:
    sentences: list[str] = []
    current: list[str] = []
    for ch in text:
        if ch in _SENTENCE_BREAKS:
            part = "".join(current).strip()
            if part:
                sentences.append(part)
            current = []
        else:
            current.append(ch)
    part = "".join(current).strip()
    if part:
        sentences.append(part)
    return sentences


@dataclass(frozen=True)
class SalienceTable:
    """Token weights plus the sorted vocabulary the mask is drawn over.

    The vocabulary order is part of the model's behavior (mask draws consume
    one uniform per vocabulary entry, in order), so it is fixed to sorted().
    """

    weights: dict[str, float]
    fitted_on: int
    vocabulary: tuple[str, ...] = field(init=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "vocabulary", tuple(sorted(self.weights)))

    def weight(self, token: str) -> float:
        return self.weights.get(token, 0.0)


def fit_salience(labeled: Sequence[LabeledExample]) -> SalienceTable:
    """weight(t) = (#examples whose reference contains t) / (1 + #examples
    whose text contains t). Presence counts, not occurrence counts; tokens
    never seen in a reference carry weight zero and are not stored."""
    if not labeled:
        raise ValueError("cannot fit a salience table on an empty labeled set")
    ref_count: dict[str, int] = {}
    doc_count: dict[str, int] = {}
    for ex in labeled:
        for tok in set(tokenize(ex.summary)):
            ref_count[tok] = ref_count.get(tok, 0) + 1
        for tok in set(tokenize(ex.text)):
            doc_count[tok] = doc_count.get(tok, 0) + 1
    weights = {t: r / (1 + doc_count.get(t, 0)) for t, r in ref_count.items()}
    return SalienceTable(weights=weights, fitted_on=len(labeled))


def _sentence_score(table: SalienceTable, tokens: list[str], mask: Optional[frozenset]) -> float:
    if mask:
        tokens = [t for t in tokens if t not in mask]
    if not tokens:
        return 0.0
    return sum(table.weight(t) for t in tokens) / len(tokens)


def summarize(
    table: SalienceTable,
    text: str,
    mask: Optional[Iterable[str]] = None,
    tie_rng: Optional[np.random.Generator] = None,
) -> str:
    """Pick the highest-scoring sentence. Exact score ties go to the earliest
    sentence, unless `tie_rng` is given, in which case one of the tied
    sentences is chosen uniformly (stochastic generation relies on this so
    that a model with nothing to say still produces disagreeing samples)."""
    sentences = split_sentences(text)
    if not sentences:
        return ""
    mask_set = frozenset(mask) if mask else None
    scores = [_sentence_score(table, tokenize(s), mask_set) for s in sentences]
    best = max(scores)
    tied = [i for i, sc in enumerate(scores) if sc == best]
    if tie_rng is not None and len(tied) > 1:
        return sentences[tied[int(tie_rng.integers(len(tied)))]]
    return sentences[tied[0]]


def stochastic_summarize(table: SalienceTable, text: str, p: float, sub_seed: int) -> str:
    """One stochastic sample: mask each vocabulary token independently with
    probability p, then summarize with random tie-breaking. p == 0 is exactly
    the deterministic path (no generator is even created)."""
    if not 0.0 <= p < 1.0:
        raise ValueError(f"mask probability must be in [0, 1), got {p}")
    if p == 0.0:
        return summarize(table, text)
    rng = np.random.default_rng(sub_seed)
    draws = rng.random(len(table.vocabulary))
    mask = frozenset(t for t, u in zip(table.vocabulary, draws) if u < p)
    return summarize(table, text, mask=mask, tie_rng=rng)


class ToyLearner(Learner):
    """In-process learner over a salience table. Each train call refits from
    scratch on exactly the labeled set it is handed; the mask probability is
    bound from the config at train time."""

    def __init__(self) -> None:
        self._table: Optional[SalienceTable] = None
        self._token: Optional[str] = None
        self._mask_rate: float = 0.0
        self._train_count = 0
        self.last_train_epochs = 0

    def train(
        self,
        labeled: Sequence[LabeledExample],
        validation: Sequence[LabeledExample],
        config: LearnerConfig,
    ) -> ModelHandle:
        if not labeled:
            raise LearnerContractError("labeled set must be non-empty")
        table = fit_salience(labeled)
        self._table = table
        self._mask_rate = config.dropout_rate
        self._token = f"toy-{self._train_count}-{table.fitted_on}"
        handle = ModelHandle(token=self._token, generation=self._train_count)
        self._train_count += 1
        self.last_train_epochs = 1
        return handle

    def _current_table(self, handle: ModelHandle) -> SalienceTable:
        if self._table is None or handle.token != self._token:
            raise LearnerContractError(
                f"model token {handle.token!r} is stale; current is {self._token!r}"
            )
        return self._table

    def generate(self, handle: ModelHandle, text: str) -> str:
        return summarize(self._current_table(handle), text)

    def generate_stochastic(
        self, handle: ModelHandle, doc_id: str, text: str, n: int, seed: int
    ) -> StochasticBatch:
        if n < 2:
            raise ValueError(f"stochastic generation needs n >= 2, got {n}")
        table = self._current_table(handle)
        summaries = tuple(
            stochastic_summarize(table, text, self._mask_rate, subsample_seed(seed, doc_id, j))
            for j in range(n)
        )
        return StochasticBatch(doc_id=doc_id, summaries=summaries)
