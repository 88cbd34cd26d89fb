"""Exact n-gram text metrics: tokenization, sentence BLEU, the pairwise
BLEU-variance disagreement score, and ROUGE-1/2/L F-scores.

All functions are pure; parallel callers get bitwise-identical results
regardless of scheduling. BLEU is asymmetric, so the disagreement score sums
both directions of every pair.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from actisum.metrics._kernels import (
    NUMBA_ENABLED,
    NUMBA_ENV_FLAG,
    bleu_pair_matrix,
    clipped_ngram_overlap,
    directed_bleu,
    lcs_length,
)

__all__ = [
    "TokenSequence",
    "BleuVarScore",
    "RougeScore",
    "tokenize",
    "bleu",
    "bleuvar",
    "rouge_n",
    "rouge_l",
    "NUMBA_ENABLED",
    "NUMBA_ENV_FLAG",
]

# Ordered lowercase tokens; produced by tokenize().
TokenSequence = list[str]

# Maximal runs of unicode alphanumerics (word chars minus underscore).
_TOKEN_RE = re.compile(r"[^\W_]+", re.UNICODE)


def tokenize(text: str) -> TokenSequence:
    """Lowercase and split on any maximal run of non-alphanumeric characters."""
    return _TOKEN_RE.findall(text.lower())


@dataclass(frozen=True)
class BleuVarScore:
    """Mean squared complement of directed pairwise BLEU over N summaries."""

    value: float
    n_samples: int
    pair_matrix: Optional[np.ndarray] = None


@dataclass(frozen=True)
class RougeScore:
    precision: float
    recall: float
    f1: float


_EMPTY = np.empty(0, dtype=np.int64)


def _encode_pair(candidate: Sequence[str], reference: Sequence[str]):
    """Intern two token sequences into int64 id arrays over a shared vocabulary."""
    ids: dict[str, int] = {}
    a = np.fromiter((ids.setdefault(t, len(ids)) for t in candidate), dtype=np.int64, count=len(candidate)) if candidate else _EMPTY
    b = np.fromiter((ids.setdefault(t, len(ids)) for t in reference), dtype=np.int64, count=len(reference)) if reference else _EMPTY
    return a, b


def bleu(candidate: Sequence[str], reference: Sequence[str]) -> float:
    """Sentence-level BLEU in [0, 1].

    Modified n-gram precisions for n = 1..min(4, |candidate|, |reference|)
    under uniform weights, with brevity penalty exp(1 - |ref|/|cand|) when the
    candidate is shorter. Returns 0.0 when either side is empty or any
    precision is zero (no smoothing).
    """
    a, b = _encode_pair(candidate, reference)
    return float(directed_bleu(a, b))


def bleuvar(summaries: Sequence[str], keep_matrix: bool = True) -> BleuVarScore:
    """Disagreement over N stochastic summaries.

    Tokenizes each summary, evaluates BLEU over all ordered pairs i != j
    (both directions), and averages the squared complements:
    sum (1 - BLEU(y_i, y_j))^2 / (N (N - 1)). Requires N >= 2.
    """
    n = len(summaries)
    if n < 2:
        raise ValueError(f"bleuvar needs at least 2 summaries, got {n}")
    token_lists = [tokenize(s) for s in summaries]
    vocab: dict[str, int] = {}
    lengths = np.array([len(t) for t in token_lists], dtype=np.int64)
    width = int(lengths.max()) if lengths.max() > 0 else 1
    tokens = np.zeros((n, width), dtype=np.int64)
    for i, toks in enumerate(token_lists):
        for j, t in enumerate(toks):
            tokens[i, j] = vocab.setdefault(t, len(vocab))
    pair = bleu_pair_matrix(tokens, lengths)
    off_diag = ~np.eye(n, dtype=bool)
    value = float(np.sum((1.0 - pair[off_diag]) ** 2) / (n * (n - 1)))
    return BleuVarScore(value=value, n_samples=n, pair_matrix=pair if keep_matrix else None)


def _f1(precision: float, recall: float) -> float:
    if precision + recall == 0.0:
        return 0.0
    return 2.0 * precision * recall / (precision + recall)


def rouge_n(candidate: Sequence[str], reference: Sequence[str], n: int) -> RougeScore:
    """Clipped n-gram overlap F-score; precision over candidate n-grams,
    recall over reference n-grams, 0/0 defined as 0."""
    if n < 1:
        raise ValueError(f"n-gram order must be >= 1, got {n}")
    a, b = _encode_pair(candidate, reference)
    clipped, c_total, r_total = clipped_ngram_overlap(a, b, n)
    precision = clipped / c_total if c_total > 0 else 0.0
    recall = clipped / r_total if r_total > 0 else 0.0
    return RougeScore(precision, recall, _f1(precision, recall))


def rouge_l(candidate: Sequence[str], reference: Sequence[str]) -> RougeScore:
    """Longest-common-subsequence F-score; all zero when either side is empty."""
    a, b = _encode_pair(candidate, reference)
    if a.shape[0] == 0 or b.shape[0] == 0:
        return RougeScore(0.0, 0.0, 0.0)
    lcs = lcs_length(a, b)
    precision = lcs / a.shape[0]
    recall = lcs / b.shape[0]
    return RougeScore(precision, recall, _f1(precision, recall))
