"""Build a local word-level checkpoint from a JSONL corpus.

Trains the tokenizer on the corpus text and saves it next to a small
randomly-initialized encoder-decoder, producing a directory loadable with
`python -m bridge --model <dir>`. Stands in for a downloaded pretrained
checkpoint where no model hub is reachable; the saved weights are the
pristine state every train request restarts from.
"""

from __future__ import annotations

import argparse
import json
from pathlib import Path

import torch

from bridge.config import BridgeConfig
from bridge.model import PRISTINE_INIT_SEED, build_word_tokenizer, tiny_model_config


def corpus_texts(path: Path) -> list[str]:
    texts = []
    with path.open(encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            doc = json.loads(line)
            texts.append(doc["text"])
            if doc.get("summary"):
                texts.append(doc["summary"])
    if not texts:
        raise ValueError(f"no documents in {path}")
    return texts


def build_checkpoint(corpus: Path, out: Path, dropout_rate: float = 0.1,
                     max_input_tokens: int = 64, max_output_tokens: int = 16) -> None:
    from transformers import BartForConditionalGeneration

    bridge_config = BridgeConfig(
        max_input_tokens=max_input_tokens, max_output_tokens=max_output_tokens
    )
    tokenizer = build_word_tokenizer(corpus_texts(corpus))
    max_positions = max(bridge_config.max_input_tokens, bridge_config.max_output_tokens) + 8
    config = tiny_model_config(len(tokenizer), dropout_rate, max_positions)
    torch.manual_seed(PRISTINE_INIT_SEED)
    model = BartForConditionalGeneration(config)
    out.mkdir(parents=True, exist_ok=True)
    tokenizer.save_pretrained(out)
    model.save_pretrained(out)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="python -m bridge.make_checkpoint", description=__doc__)
    parser.add_argument("--corpus", required=True, type=Path, help="JSONL with text (and summary) fields")
    parser.add_argument("--out", required=True, type=Path)
    parser.add_argument("--dropout-rate", type=float, default=0.1)
    args = parser.parse_args(argv)
    build_checkpoint(args.corpus, args.out, args.dropout_rate)
    print(f"wrote checkpoint to {args.out}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
