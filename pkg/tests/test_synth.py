import collections

import pytest

from actisum.corpus import LabeledExample, load_corpus
from actisum.metrics import bleuvar, tokenize
from actisum.seeding import subsample_seed
from actisum.synth import (
    CLASS_FLAT,
    CLASS_GARBAGE,
    CLASS_PEAKED,
    class_of,
    garbage_ids,
    generate_corpus,
    generate_test_corpus,
    main,
)
from actisum.toy import fit_salience, split_sentences, stochastic_summarize


class TestClassOf:
    def test_prefixes(self):
        assert class_of("pk-0001") == CLASS_PEAKED
        assert class_of("fl-0001") == CLASS_FLAT
        assert class_of("gb-0001") == CLASS_GARBAGE
        assert class_of("ts-0001") == CLASS_PEAKED

    def test_unknown_prefix(self):
        with pytest.raises(ValueError):
            class_of("zz-0001")


class TestGenerateCorpus:
    def test_exact_class_counts(self, synth_corpus):
        counts = collections.Counter(class_of(d.id) for d in synth_corpus)
        assert counts[CLASS_PEAKED] == 1240
        assert counts[CLASS_FLAT] == 600
        assert counts[CLASS_GARBAGE] == 160

    def test_unique_ids_with_references(self, synth_corpus):
        ids = [d.id for d in synth_corpus]
        assert len(set(ids)) == len(ids) == 2000
        assert all(d.reference for d in synth_corpus)

    def test_deterministic(self):
        assert generate_corpus(100, seed=4) == generate_corpus(100, seed=4)
        assert generate_corpus(100, seed=4) != generate_corpus(100, seed=5)

    def test_shuffled_not_grouped_by_class(self, synth_corpus):
        first_hundred = {class_of(d.id) for d in synth_corpus[:100]}
        assert len(first_hundred) == 3

    def test_some_garbage_docs_are_empty(self, synth_corpus):
        garbage = [d for d in synth_corpus if class_of(d.id) == CLASS_GARBAGE]
        empty = [d for d in garbage if d.is_empty]
        assert len(empty) == 8  # every 20th of 160
        assert all(d.reference for d in empty)

    def test_rate_validation(self):
        with pytest.raises(ValueError):
            generate_corpus(10, seed=0, flat_rate=0.6, garbage_rate=0.5)
        with pytest.raises(ValueError):
            generate_corpus(0, seed=0)

    def test_round_robin_topic_balance(self, synth_corpus):
        def topic_of(doc):
            for tok in tokenize(doc.reference):
                if tok.startswith("topic"):
                    return tok[:8]
            return None

        peaked = [d for d in synth_corpus if class_of(d.id) == CLASS_PEAKED]
        per_topic = collections.Counter(topic_of(d) for d in peaked)
        assert len(per_topic) == 150
        assert max(per_topic.values()) - min(per_topic.values()) <= 1


class TestDocumentShapes:
    def test_peaked_structure(self, synth_corpus):
        doc = next(d for d in synth_corpus if class_of(d.id) == CLASS_PEAKED)
        sentences = split_sentences(doc.text)
        assert len(sentences) == 4
        ref_tokens = set(tokenize(doc.reference))
        assert len(ref_tokens) == 3
        # exactly one sentence carries the reference tokens
        carriers = [s for s in sentences if ref_tokens <= set(tokenize(s))]
        assert len(carriers) == 1

    def test_flat_structure(self, synth_corpus):
        doc = next(d for d in synth_corpus if class_of(d.id) == CLASS_FLAT)
        sentences = split_sentences(doc.text)
        assert len(sentences) == 4
        ref_tokens = set(tokenize(doc.reference))
        # no single sentence contains the whole reference
        assert not any(ref_tokens <= set(tokenize(s)) for s in sentences)
        # every sentence carries some topic signal
        assert all(any(t.startswith("topic") for t in tokenize(s)) for s in sentences)

    def test_garbage_structure(self, synth_corpus):
        docs = [d for d in synth_corpus if class_of(d.id) == CLASS_GARBAGE and not d.is_empty]
        for doc in docs[:10]:
            sentences = split_sentences(doc.text)
            assert 60 <= len(sentences) <= 100
            tokens = [t for s in sentences for t in tokenize(s)]
            assert len(set(tokens)) == len(tokens)  # every token unique
        # reference carries junk plus common filler (poison for extraction)
        ref = tokenize(docs[0].reference)
        assert ref[0].startswith("junkref")
        assert sum(t.startswith("filler") for t in ref) == 2

    def test_garbage_ids_helper(self, synth_corpus):
        ids = garbage_ids(synth_corpus)
        assert len(ids) == 160
        assert all(i.startswith("gb-") for i in ids)


class TestGenerateTestCorpus:
    def test_peaked_only(self):
        docs = generate_test_corpus(50, seed=9)
        assert all(class_of(d.id) == CLASS_PEAKED for d in docs)
        assert all(d.id.startswith("ts-") for d in docs)
        assert len({d.id for d in docs}) == 50

    def test_disjoint_from_training_ids(self, synth_corpus):
        test = generate_test_corpus(300, seed=99)
        assert not ({d.id for d in test} & {d.id for d in synth_corpus})


class TestUncertaintySeparationBound:
    """The class design guarantee the acquisition threshold relies on:
     4-sentence documents can never score above 1 - 16/90, while long
    garbage documents sit near 1."""

    BOUND = 1 - 16 / 90

    def _score(self, table, doc, seed=0, n=10):
        sums = [
            stochastic_summarize(table, doc.text, 0.1, subsample_seed(seed, doc.id, j))
            for j in range(n)
        ]
        return bleuvar(sums).value

    def test_non_garbage_below_bound_and_garbage_above(self, synth_corpus):
        train = [
            LabeledExample(doc_id=d.id, text=d.text, summary=d.reference)
            for d in synth_corpus[:200]
        ]
        table = fit_salience(train)
        clean = [d for d in synth_corpus if class_of(d.id) != CLASS_GARBAGE][:100]
        garbage = [d for d in synth_corpus if class_of(d.id) == CLASS_GARBAGE and not d.is_empty][:30]
        clean_scores = [self._score(table, d) for d in clean]
        garbage_scores = [self._score(table, d) for d in garbage]
        assert max(clean_scores) <= self.BOUND + 1e-12
        assert min(garbage_scores) > 0.9
        # tau = 0.87 separates with margin on both sides
        assert max(clean_scores) < 0.87 < min(garbage_scores)


class TestCli:
    def test_main_writes_loadable_corpus(self, tmp_path, capsys):
        out = tmp_path / "c.jsonl"
        assert main(["--out", str(out), "--size", "60", "--seed", "1"]) == 0
        docs = load_corpus(out)
        assert len(docs) == 60
        assert docs == generate_corpus(60, seed=1)
        assert "wrote 60 documents" in capsys.readouterr().out

    def test_main_test_flag(self, tmp_path):
        out = tmp_path / "t.jsonl"
        assert main(["--out", str(out), "--size", "20", "--seed", "2", "--test"]) == 0
        docs = load_corpus(out)
        assert docs == generate_test_corpus(20, seed=2)
