"""Train/generate state machine behind the wire loop."""

from __future__ import annotations

from typing import Optional, Sequence

import torch

from bridge.config import TINY_MODEL, BridgeConfig
from bridge.model import (
    _DROPOUT_KEYS,
    Summarizer,
    build_tiny,
    build_word_tokenizer,
    fine_tune,
    load_checkpoint,
)


def _wire_value(config: dict, key: str, default, kind):
    value = config.get(key, default)
    if not isinstance(value, kind) or isinstance(value, bool):
        raise ValueError(f"config field {key!r} must be {kind.__name__}")
    return value


def _checkpoint_rate(model_config) -> float:
    for key in _DROPOUT_KEYS:
        if hasattr(model_config, key):
            return float(getattr(model_config, key))
    return 0.0


class BridgeLearner:
    """Holds at most one trained model; every train replaces it wholesale."""

    def __init__(self, config: BridgeConfig):
        self.config = config
        self.current_token: Optional[str] = None
        self._summarizer: Optional[Summarizer] = None
        self._train_count = 0

    def train(self, labeled: Sequence[dict], validation: Sequence[dict], wire_config: dict) -> tuple[str, int]:
        beam_size = _wire_value(wire_config, "beam_size", self.config.beam_size, int)
        max_epochs = _wire_value(wire_config, "max_epochs", 10, int)
        patience = _wire_value(wire_config, "patience", 4, int)
        base_seed = _wire_value(wire_config, "base_seed", 0, int)
        if beam_size < 1:
            raise ValueError(f"beam_size must be >= 1, got {beam_size}")
        if max_epochs < 1:
            raise ValueError(f"max_epochs must be >= 1, got {max_epochs}")
        if not 0 <= patience <= max_epochs:
            raise ValueError(f"patience must be in [0, max_epochs], got {patience}")
        rate = wire_config.get("dropout_rate", self.config.dropout_rate)
        if rate is not None and not (isinstance(rate, (int, float)) and 0.0 <= rate < 1.0):
            raise ValueError(f"dropout_rate must be in [0, 1), got {rate!r}")

        if self.config.model == TINY_MODEL:
            texts = [e["text"] for e in list(labeled) + list(validation)]
            texts += [e["summary"] for e in list(labeled) + list(validation)]
            tokenizer = build_word_tokenizer(texts)
            model = build_tiny(tokenizer, 0.1 if rate is None else float(rate), self.config)
        else:
            tokenizer, model = load_checkpoint(
                self.config.model, None if rate is None else float(rate), self.config
            )
        effective_rate = _checkpoint_rate(model.config)

        epochs = fine_tune(
            model, tokenizer, list(labeled), list(validation),
            max_epochs=max_epochs, patience=patience, base_seed=base_seed, config=self.config,
        )
        self._train_count += 1
        self.current_token = f"bridge-{self._train_count - 1}-{len(labeled)}"
        self._summarizer = Summarizer(model, tokenizer, beam_size, effective_rate, self.config)
        return self.current_token, epochs

    def generate(self, text: str) -> str:
        return self._summarizer.summarize(text)

    def generate_stochastic(self, text: str, n: int, seed: int, doc_id: str) -> list[str]:
        return self._summarizer.summarize_stochastic(text, n, seed, doc_id)

    def close(self) -> None:
        self._summarizer = None

    @staticmethod
    def setup_runtime() -> None:
        """Single-threaded CPU math so repeated trainings are bit-stable."""
        torch.set_num_threads(1)
