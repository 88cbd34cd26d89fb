"""Integer-token kernels behind the text metrics.

A scoring step costs O(k * n^2) directed sentence-BLEU evaluations, which is
where nearly all metric time goes, so these loops are JIT-compiled with numba
when it is importable. Set ACTISUM_NO_NUMBA=1 to force the pure NumPy/Python
fallback (same functions, undecorated); benchmarks/compare_backends.py times
the two paths against each other.

All kernels take int64 token-id arrays. Token strings are interned to ids by
the wrappers in actisum.metrics; n-gram counting is brute force over
positions, which is exact and cheap at sentence scale.
"""

from __future__ import annotations

import math
import os

import numpy as np

NUMBA_ENV_FLAG = "ACTISUM_NO_NUMBA"


def _numba_enabled() -> bool:
    if os.environ.get(NUMBA_ENV_FLAG, "").strip() not in ("", "0"):
        return False
    try:
        import numba  # noqa: F401
    except ImportError:
        return False
    return True


NUMBA_ENABLED = _numba_enabled()


def clipped_ngram_overlap(cand, ref, n):
    """Clipped n-gram matches between two token-id arrays.

    Returns (clipped, cand_total, ref_total) where clipped is
    sum over distinct candidate n-grams of min(count in cand, count in ref)
    and the totals are the n-gram counts of each side (0 when too short).
    """
    c = cand.shape[0]
    r = ref.shape[0]
    c_total = c - n + 1
    r_total = r - n + 1
    if c_total < 0:
        c_total = 0
    if r_total < 0:
        r_total = 0
    if c_total == 0 or r_total == 0:
        return 0, c_total, r_total
    clipped = 0
    for i in range(c_total):
        # count each distinct candidate n-gram once, at its first occurrence
        dup = False
        for j in range(i):
            same = True
            for t in range(n):
                if cand[i + t] != cand[j + t]:
                    same = False
                    break
            if same:
                dup = True
                break
        if dup:
            continue
        cnt_c = 0
        for j in range(c_total):
            same = True
            for t in range(n):
                if cand[i + t] != cand[j + t]:
                    same = False
                    break
            if same:
                cnt_c += 1
        cnt_r = 0
        for j in range(r_total):
            same = True
            for t in range(n):
                if cand[i + t] != ref[j + t]:
                    same = False
                    break
            if same:
                cnt_r += 1
        if cnt_r < cnt_c:
            clipped += cnt_r
        else:
            clipped += cnt_c
    return clipped, c_total, r_total


def directed_bleu(cand, ref):
    """Sentence BLEU of candidate against reference over token-id arrays.

    Orders 1..min(4, len(cand), len(ref)) with uniform weights; 0.0 when a
    side is empty or any modified precision is zero (no smoothing); brevity
    penalty exp(1 - r/c) when the candidate is shorter than the reference.
    """
    c = cand.shape[0]
    r = ref.shape[0]
    m = 4
    if c < m:
        m = c
    if r < m:
        m = r
    if m == 0:
        return 0.0
    log_sum = 0.0
    for n in range(1, m + 1):
        clipped, c_total, _ = clipped_ngram_overlap(cand, ref, n)
        if clipped == 0:
            return 0.0
        log_sum += math.log(clipped / c_total)
    score = math.exp(log_sum / m)
    if c < r:
        score *= math.exp(1.0 - r / c)
    return score


def bleu_pair_matrix(tokens, lengths):
    """N x N matrix of directed_bleu(row i, row j) over padded token rows."""
    n = tokens.shape[0]
    out = np.zeros((n, n), dtype=np.float64)
    for i in range(n):
        for j in range(n):
            out[i, j] = directed_bleu(tokens[i, : lengths[i]], tokens[j, : lengths[j]])
    return out


def lcs_length(a, b):
    """Longest-common-subsequence length of two token-id arrays (rolling-row DP)."""
    m = a.shape[0]
    n = b.shape[0]
    if m == 0 or n == 0:
        return 0
    dp = np.zeros(n + 1, dtype=np.int64)
    for i in range(m):
        prev = 0
        for j in range(n):
            tmp = dp[j + 1]
            if a[i] == b[j]:
                dp[j + 1] = prev + 1
            elif dp[j] > dp[j + 1]:
                dp[j + 1] = dp[j]
            prev = tmp
    return int(dp[n])


if NUMBA_ENABLED:
    from numba import njit

    clipped_ngram_overlap = njit(cache=True)(clipped_ngram_overlap)
    directed_bleu = njit(cache=True)(directed_bleu)
    bleu_pair_matrix = njit(cache=True)(bleu_pair_matrix)
    lcs_length = njit(cache=True)(lcs_length)
