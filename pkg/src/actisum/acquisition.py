"""Scoring candidates by disagreement and picking the next batch to label."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Sequence

from actisum.corpus import Document, PoolState, sample_candidates
from actisum.errors import ConfigError
from actisum.metrics import bleuvar
from actisum.protocol import Learner, ModelHandle

POLICY_RANDOM = "random"
POLICY_BAS = "bas"


@dataclass(frozen=True)
class AcquisitionPolicy:
    """What one acquisition step does.

    `kind` is "random" (draw s documents uniformly, no scoring) or "bas"
    (score k sampled candidates with n stochastic summaries each, filter by
    tau, take the s most uncertain). tau is a strict upper bound: a score
    exactly equal to tau is kept.
    """

    kind: str
    k: int
    s: int
    n: int = 10
    tau: float = 0.96

    def __post_init__(self) -> None:
        if self.kind not in (POLICY_RANDOM, POLICY_BAS):
            raise ConfigError(f"unknown policy kind {self.kind!r}")
        if self.k < 1:
            raise ConfigError(f"k must be >= 1, got {self.k}")
        if self.s < 1:
            raise ConfigError(f"s must be >= 1, got {self.s}")
        if self.kind == POLICY_BAS and self.s > self.k:
            raise ConfigError(f"s ({self.s}) must not exceed k ({self.k})")
        if self.n < 2:
            raise ConfigError(f"n must be >= 2, got {self.n}")
        if not 0.0 < self.tau <= 1.0:
            raise ConfigError(f"tau must be in (0, 1], got {self.tau}")


@dataclass(frozen=True)
class UncertaintyRecord:
    doc_id: str
    bleuvar: float
    summaries: tuple[str, ...]
    filtered: bool = False

    @property
    def n_samples(self) -> int:
        return len(self.summaries)


def score_candidates(
    learner: Learner,
    handle: ModelHandle,
    candidates: Sequence[Document],
    n: int,
    seed: int,
) -> list[UncertaintyRecord]:
    """One BLEUVar score per candidate, in candidate order. Every document
    gets its own stochastic batch keyed by (seed, doc_id), so scores do not
    depend on how the candidate list is ordered or partitioned."""
    records = []
    for doc in candidates:
        batch = learner.generate_stochastic(handle, doc.id, doc.text, n, seed)
        score = bleuvar(batch.summaries, keep_matrix=False)
        records.append(
            UncertaintyRecord(doc_id=doc.id, bleuvar=score.value, summaries=batch.summaries)
        )
    return records


def score_candidates_parallel(
    workers: Sequence[tuple[Learner, ModelHandle]],
    candidates: Sequence[Document],
    n: int,
    seed: int,
) -> list[UncertaintyRecord]:
    """Same result as score_candidates, split round-robin over several
    learner instances (each one talks to its own child process, so a worker
    is never shared between threads). Output order matches input order."""
    if not workers:
        raise ValueError("need at least one (learner, handle) worker")
    if len(workers) == 1 or len(candidates) <= 1:
        learner, handle = workers[0]
        return score_candidates(learner, handle, candidates, n, seed)

    slots: list[list[UncertaintyRecord]] = [[] for _ in workers]

    def run(w: int) -> None:
        learner, handle = workers[w]
        slots[w] = score_candidates(learner, handle, candidates[w :: len(workers)], n, seed)

    with ThreadPoolExecutor(max_workers=len(workers)) as pool:
        futures = [pool.submit(run, w) for w in range(len(workers))]
        for f in futures:
            f.result()

    merged: list[UncertaintyRecord] = [None] * len(candidates)  # type: ignore[list-item]
    for w, part in enumerate(slots):
        for offset, record in enumerate(part):
            merged[w + offset * len(workers)] = record
    return merged


def apply_threshold(records: Sequence[UncertaintyRecord], tau: float) -> list[UncertaintyRecord]:
    """Flag records whose score exceeds tau (strictly) as filtered noise."""
    return [replace(r, filtered=r.bleuvar > tau) for r in records]


def select(records: Sequence[UncertaintyRecord], s: int, tau: float) -> list[str]:
    """The s most uncertain doc ids with scores at or below tau, descending,
    ties broken by doc id so the choice never depends on scoring order. May
    return fewer than s ids; the caller decides what an empty step means."""
    if s < 1:
        raise ValueError(f"s must be >= 1, got {s}")
    kept = [r for r in records if r.bleuvar <= tau]
    kept.sort(key=lambda r: (-r.bleuvar, r.doc_id))
    return [r.doc_id for r in kept[:s]]


def random_select(pool: PoolState, s: int, seed: int) -> list[str]:
    """Uniform sample without replacement of min(s, u) ids from the unlabeled
    pool; the no-scoring baseline selection."""
    if s < 1:
        raise ValueError(f"s must be >= 1, got {s}")
    return [doc.id for doc in sample_candidates(pool, s, seed)]
