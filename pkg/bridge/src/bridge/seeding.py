"""Per-sample seed derivation fixed by the learner wire protocol.

Sample j of a stochastic batch must be generated under
first-8-bytes-big-endian(SHA-256("{seed}|{doc_id}|{j}")), so batches are
bit-reproducible regardless of request order or engine-side parallelism.
"""

from __future__ import annotations

import hashlib


def subsample_seed(seed: int, doc_id: str, sample_index: int) -> int:
    key = f"{seed}|{doc_id}|{sample_index}".encode("utf-8")
    return int.from_bytes(hashlib.sha256(key).digest()[:8], "big")
