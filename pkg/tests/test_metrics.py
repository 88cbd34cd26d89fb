import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from actisum.metrics import bleu, bleuvar, rouge_l, rouge_n, tokenize
from oracles import oracle_bleu, oracle_bleuvar, oracle_lcs, oracle_rouge_l, oracle_rouge_n

tokens_st = st.lists(st.sampled_from([f"t{i}" for i in range(10)]), min_size=0, max_size=15)
nonempty_tokens_st = st.lists(st.sampled_from([f"t{i}" for i in range(10)]), min_size=1, max_size=15)


class TestTokenize:
    def test_basic(self):
        assert tokenize("The cat sat.") == ["the", "cat", "sat"]

    def test_empty(self):
        assert tokenize("") == []

    def test_punctuation_runs(self):
        assert tokenize("A-B  c") == ["a", "b", "c"]

    def test_underscore_is_a_separator(self):
        assert tokenize("a_b") == ["a", "b"]

    def test_digits_kept(self):
        assert tokenize("topic007w0 x1") == ["topic007w0", "x1"]


class TestBleu:
    def test_identical(self):
        assert bleu(["a", "b", "c"], ["a", "b", "c"]) == 1.0

    def test_zero_overlap(self):
        assert bleu(["a", "b"], ["c", "d"]) == 0.0

    def test_short_candidate_brevity(self):
        got = bleu(["the", "cat", "sat"], ["the", "cat", "sat", "on", "the", "mat"])
        assert got == pytest.approx(math.exp(-1), abs=1e-12)

    def test_empty_sides(self):
        assert bleu([], ["a"]) == 0.0
        assert bleu(["a"], []) == 0.0
        assert bleu([], []) == 0.0

    def test_longer_candidate_no_penalty(self):
        # all precisions 1 is impossible with extra tokens, so compare to oracle
        cand = ["a", "b", "a", "b"]
        ref = ["a", "b"]
        assert bleu(cand, ref) == pytest.approx(oracle_bleu(cand, ref), abs=1e-12)

    @given(cand=tokens_st, ref=tokens_st)
    @settings(max_examples=300, deadline=None)
    def test_matches_oracle(self, cand, ref):
        assert bleu(cand, ref) == pytest.approx(oracle_bleu(cand, ref), abs=1e-12)

    @given(x=nonempty_tokens_st)
    @settings(max_examples=100, deadline=None)
    def test_self_is_one(self, x):
        assert bleu(x, x) == 1.0

    @given(cand=tokens_st, ref=tokens_st)
    @settings(max_examples=100, deadline=None)
    def test_range(self, cand, ref):
        assert 0.0 <= bleu(cand, ref) <= 1.0


class TestBleuVar:
    def test_identical_samples(self):
        score = bleuvar(["a cat sat"] * 10)
        assert score.value == 0.0
        assert score.n_samples == 10

    def test_two_disjoint(self):
        assert bleuvar(["a b c", "x y z"]).value == 1.0

    def test_two_identical_one_disjoint(self):
        got = bleuvar(["a b c", "a b c", "x y z"])
        assert got.value == pytest.approx(4 / 6, abs=1e-12)

    def test_arity(self):
        with pytest.raises(ValueError):
            bleuvar(["only one"])
        with pytest.raises(ValueError):
            bleuvar([])

    def test_pair_matrix(self):
        summaries = ["a b c", "a b", "c d e f"]
        score = bleuvar(summaries)
        assert score.pair_matrix is not None
        assert score.pair_matrix.shape == (3, 3)
        toks = [tokenize(s) for s in summaries]
        for i in range(3):
            for j in range(3):
                assert score.pair_matrix[i, j] == pytest.approx(
                    oracle_bleu(toks[i], toks[j]), abs=1e-12
                )

    def test_matrix_can_be_dropped(self):
        assert bleuvar(["a", "b"], keep_matrix=False).pair_matrix is None

    @given(st.lists(st.text(alphabet="abcxyz ", min_size=0, max_size=12), min_size=2, max_size=6))
    @settings(max_examples=200, deadline=None)
    def test_matches_oracle_and_range(self, summaries):
        got = bleuvar(summaries).value
        assert got == pytest.approx(oracle_bleuvar(summaries), abs=1e-12)
        assert 0.0 <= got <= 1.0 + 1e-15

    @given(
        st.lists(st.text(alphabet="abcxyz ", min_size=0, max_size=12), min_size=2, max_size=6),
        st.randoms(use_true_random=False),
    )
    @settings(max_examples=100, deadline=None)
    def test_permutation_invariant(self, summaries, rand):
        shuffled = list(summaries)
        rand.shuffle(shuffled)
        assert bleuvar(shuffled).value == pytest.approx(bleuvar(summaries).value, abs=1e-12)

    def test_less_overlap_does_not_decrease(self):
        base = ["a b c", "a b c", "a b d"]
        worse = ["a b c", "a b c", "x y z"]
        assert bleuvar(worse).value >= bleuvar(base).value

    def test_empty_summaries_read_as_maximal_disagreement(self):
        # empty-vs-empty BLEU is 0 by contract, so a batch of empty outputs
        # registers as noise rather than agreement
        assert bleuvar(["", "", ""]).value == 1.0


class TestRougeN:
    def test_identical(self):
        s = rouge_n(["a", "b"], ["a", "b"], 1)
        assert (s.precision, s.recall, s.f1) == (1.0, 1.0, 1.0)

    def test_disjoint(self):
        s = rouge_n(["a"], ["b"], 1)
        assert (s.precision, s.recall, s.f1) == (0.0, 0.0, 0.0)

    def test_hand_case(self):
        s = rouge_n(["the", "cat", "sat"], ["the", "cat"], 1)
        assert s.precision == pytest.approx(2 / 3, abs=1e-12)
        assert s.recall == 1.0
        assert s.f1 == pytest.approx(0.8, abs=1e-12)

    def test_order_validation(self):
        with pytest.raises(ValueError):
            rouge_n(["a"], ["a"], 0)

    def test_empty_sides_are_zero(self):
        for cand, ref in (([], ["a"]), (["a"], []), ([], [])):
            s = rouge_n(cand, ref, 1)
            assert (s.precision, s.recall, s.f1) == (0.0, 0.0, 0.0)

    @given(cand=tokens_st, ref=tokens_st, n=st.integers(min_value=1, max_value=3))
    @settings(max_examples=300, deadline=None)
    def test_matches_oracle(self, cand, ref, n):
        got = rouge_n(cand, ref, n)
        want_p, want_r, want_f = oracle_rouge_n(cand, ref, n)
        assert got.precision == pytest.approx(want_p, abs=1e-12)
        assert got.recall == pytest.approx(want_r, abs=1e-12)
        assert got.f1 == pytest.approx(want_f, abs=1e-12)


class TestRougeL:
    def test_identical(self):
        s = rouge_l(["a", "b", "c"], ["a", "b", "c"])
        assert (s.precision, s.recall, s.f1) == (1.0, 1.0, 1.0)

    def test_hand_case(self):
        s = rouge_l(["a", "b", "c"], ["a", "x", "c"])
        assert s.f1 == pytest.approx(2 / 3, abs=1e-12)

    def test_empty(self):
        for cand, ref in (([], ["a"]), (["a"], []), ([], [])):
            s = rouge_l(cand, ref)
            assert (s.precision, s.recall, s.f1) == (0.0, 0.0, 0.0)

    @given(cand=tokens_st, ref=tokens_st)
    @settings(max_examples=300, deadline=None)
    def test_matches_dp_oracle(self, cand, ref):
        got = rouge_l(cand, ref)
        want_p, want_r, want_f = oracle_rouge_l(cand, ref)
        assert got.precision == pytest.approx(want_p, abs=1e-12)
        assert got.recall == pytest.approx(want_r, abs=1e-12)
        assert got.f1 == pytest.approx(want_f, abs=1e-12)

    def test_lcs_not_contiguous(self):
        # subsequence, not substring
        s = rouge_l(["a", "q", "b", "q", "c"], ["a", "b", "c"])
        assert s.recall == 1.0
        assert s.precision == pytest.approx(3 / 5, abs=1e-12)
