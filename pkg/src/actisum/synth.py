"""Synthetic corpus generator for desk-scale runs.

Documents come in three classes, recognizable by id prefix:

  pk- "peaked": four sentences, one of which carries five tokens of the
      document's topic; the reference is three of those topic tokens. Once a
      topic has been seen in training, extraction finds the key sentence; a
      sampled summary of an unseen topic is a coin flip over four sentences.
  fl- "flat": four sentences that each mix two topic tokens with filler, so
      even a trained model sees closer scores.
  gb- "garbage": dozens of one-token sentences, every token unique to the
      document (a few are entirely empty). No model ever learns anything
      about them, so stochastic summaries disagree almost completely and
      their disagreement score sits near 1. They exist to feed the noise
      filter; a random baseline wastes budget on them.

With ten stochastic samples, a four-sentence document's disagreement is
bounded by 1 - 16/90 (the most even split of 10 picks over 4 sentences),
about 0.822, while garbage documents with 60+ sentences sit above 0.93 with
overwhelming probability. Any threshold between those two, e.g. 0.87,
separates the classes.
"""

from __future__ import annotations

import argparse
from pathlib import Path
from typing import Sequence

import numpy as np

from actisum.corpus import Document, write_corpus

CLASS_PEAKED = "peaked"
CLASS_FLAT = "flat"
CLASS_GARBAGE = "garbage"

_PREFIXES = {"pk": CLASS_PEAKED, "fl": CLASS_FLAT, "gb": CLASS_GARBAGE, "ts": CLASS_PEAKED}

_FILLER_VOCAB = tuple(f"filler{i:02d}" for i in range(40))


def class_of(doc_id: str) -> str:
    prefix = doc_id.split("-", 1)[0]
    if prefix not in _PREFIXES:
        raise ValueError(f"doc id {doc_id!r} has no known class prefix")
    return _PREFIXES[prefix]


def _topic_tokens(topic: int) -> list[str]:
    return [f"topic{topic:03d}w{j}" for j in range(6)]


def _reference(topic: int) -> str:
    return " ".join(_topic_tokens(topic)[:3])


def _peaked_doc(doc_id: str, topic: int, rng: np.random.Generator) -> Document:
    words = _topic_tokens(topic)
    fillers = rng.choice(len(_FILLER_VOCAB), size=15, replace=False)
    key = " ".join(words[:5]) + "."
    sentences = [
        " ".join(_FILLER_VOCAB[f] for f in fillers[i * 5 : (i + 1) * 5]) + "." for i in range(3)
    ]
    sentences.insert(int(rng.integers(4)), key)
    return Document(id=doc_id, text=" ".join(sentences), reference=_reference(topic))


def _flat_doc(doc_id: str, topic: int, rng: np.random.Generator) -> Document:
    words = _topic_tokens(topic)
    fillers = rng.choice(len(_FILLER_VOCAB), size=12, replace=False)
    sentences = []
    for i in range(4):
        topical = [words[(2 * i) % 6], words[(2 * i + 1) % 6]]
        filler = [_FILLER_VOCAB[f] for f in fillers[i * 3 : (i + 1) * 3]]
        sentences.append(" ".join(topical + filler) + ".")
    return Document(id=doc_id, text=" ".join(sentences), reference=_reference(topic))


def _garbage_doc(doc_id: str, index: int, rng: np.random.Generator, empty: bool) -> Document:
    # The reference mixes in filler tokens, so labeling a garbage document
    # leaks weight onto ubiquitous filler and degrades extraction on unseen
    # topics: acquiring noise actively hurts, it does not just waste budget.
    fillers = rng.choice(len(_FILLER_VOCAB), size=2, replace=False)
    reference = " ".join([f"junkref{index:04d}", *(_FILLER_VOCAB[f] for f in fillers)])
    if empty:
        return Document(id=doc_id, text="", reference=reference)
    count = int(rng.integers(60, 101))
    text = " ".join(f"junk{index:04d}x{i}." for i in range(count))
    return Document(id=doc_id, text=text, reference=reference)


def generate_corpus(
    size: int,
    seed: int,
    topics: int = 150,
    flat_rate: float = 0.30,
    garbage_rate: float = 0.08,
) -> list[Document]:
    """A mixed training pool. Class counts are exact rounded fractions of
    `size`; topics rotate round-robin within each class, so every topic is
    equally represented and learning curves measure coverage."""
    if size < 1:
        raise ValueError(f"size must be >= 1, got {size}")
    if not 0 <= flat_rate + garbage_rate < 1:
        raise ValueError("flat_rate + garbage_rate must stay below 1")
    rng = np.random.default_rng(seed)
    n_garbage = int(round(size * garbage_rate))
    n_flat = int(round(size * flat_rate))
    n_peaked = size - n_garbage - n_flat

    # Topics rotate round-robin so every topic has the same pool presence;
    # learning curves then measure coverage, not topic-popularity luck.
    docs: list[Document] = []
    for i in range(n_peaked):
        docs.append(_peaked_doc(f"pk-{i:04d}", i % topics, rng))
    for i in range(n_flat):
        docs.append(_flat_doc(f"fl-{i:04d}", i % topics, rng))
    for i in range(n_garbage):
        docs.append(_garbage_doc(f"gb-{i:04d}", i, rng, empty=(i % 20 == 19)))

    order = rng.permutation(len(docs))
    return [docs[int(i)] for i in order]


def generate_test_corpus(size: int, seed: int, topics: int = 150) -> list[Document]:
    """Held-out evaluation set: peaked documents only, same topic space."""
    if size < 1:
        raise ValueError(f"size must be >= 1, got {size}")
    rng = np.random.default_rng(seed)
    return [_peaked_doc(f"ts-{i:04d}", i % topics, rng) for i in range(size)]


def garbage_ids(docs: Sequence[Document]) -> set[str]:
    return {d.id for d in docs if class_of(d.id) == CLASS_GARBAGE}


def main(argv: Sequence[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="python -m actisum.synth", description="Generate a synthetic corpus as JSONL."
    )
    parser.add_argument("--out", required=True, type=Path)
    parser.add_argument("--size", type=int, default=2000)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--topics", type=int, default=150)
    parser.add_argument("--flat-rate", type=float, default=0.30)
    parser.add_argument("--garbage-rate", type=float, default=0.08)
    parser.add_argument(
        "--test", action="store_true", help="generate a peaked-only evaluation set instead"
    )
    args = parser.parse_args(argv)
    if args.test:
        docs = generate_test_corpus(args.size, args.seed, topics=args.topics)
    else:
        docs = generate_corpus(
            args.size,
            args.seed,
            topics=args.topics,
            flat_rate=args.flat_rate,
            garbage_rate=args.garbage_rate,
        )
    write_corpus(docs, args.out)
    print(f"wrote {len(docs)} documents to {args.out}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
