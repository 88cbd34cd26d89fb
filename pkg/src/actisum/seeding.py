"""Deterministic seed derivation.

Every randomized phase draws from its own purpose-labeled stream derived from
the master seed, so e.g. switching the acquisition policy never perturbs the
pool split. The per-sample sub-seed derivation is part of the learner wire
protocol: external learners must reproduce it to yield identical stochastic
batches (see docs/wire_protocol.md).
"""

from __future__ import annotations

import hashlib


def derive_seed(*parts: object) -> int:
    """64-bit seed from a label path: first 8 bytes (big-endian) of
    SHA-256 over the '|'-joined string forms of the parts."""
    key = "|".join(str(p) for p in parts)
    digest = hashlib.sha256(key.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big")


def subsample_seed(seed: int, doc_id: str, sample_index: int) -> int:
    """Seed for MC sample `sample_index` of document `doc_id`.

    Fixed by the wire protocol: derive_seed(seed, doc_id, sample_index).
    Keeps batches reproducible and independent across documents regardless
    of scoring order or worker partitioning.
    """
    return derive_seed(seed, doc_id, sample_index)
