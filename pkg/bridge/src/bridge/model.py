"""Model construction, fine-tuning, and generation.

Two ways to obtain pristine weights for a train request: load a saved
checkpoint (path or hub id), or, in "tiny" mode, build a small
randomly-initialized encoder-decoder whose word-level vocabulary comes from
the train payload itself. Either way every train starts from those pristine
weights, never from the previously fine-tuned model.
"""

from __future__ import annotations

from typing import Optional, Sequence

import torch
from tokenizers import Tokenizer, models, normalizers, pre_tokenizers, processors, trainers
from transformers import (
    AutoConfig,
    AutoModelForSeq2SeqLM,
    AutoTokenizer,
    BartConfig,
    BartForConditionalGeneration,
    PreTrainedTokenizerFast,
)

from bridge.config import TINY_MODEL, BridgeConfig
from bridge.seeding import subsample_seed

SPECIAL_TOKENS = ["<pad>", "<s>", "</s>", "<unk>"]

# All weights a "pristine" tiny model ever has are drawn under this seed, so
# identical payloads rebuild identical models.
PRISTINE_INIT_SEED = 20240

# Config keys that hold dropout probabilities across common seq2seq families.
_DROPOUT_KEYS = ("dropout", "attention_dropout", "activation_dropout", "dropout_rate")


class ModelLoadError(RuntimeError):
    pass


def build_word_tokenizer(texts: Sequence[str]) -> PreTrainedTokenizerFast:
    """Lowercased word-level tokenizer trained on `texts`, with <s>/</s>
    baked into every encoding."""
    tok = Tokenizer(models.WordLevel(unk_token="<unk>"))
    tok.normalizer = normalizers.Lowercase()
    tok.pre_tokenizer = pre_tokenizers.Whitespace()
    trainer = trainers.WordLevelTrainer(special_tokens=SPECIAL_TOKENS, vocab_size=8192)
    tok.train_from_iterator(texts, trainer)
    tok.post_processor = processors.TemplateProcessing(
        single="<s> $A </s>",
        special_tokens=[("<s>", tok.token_to_id("<s>")), ("</s>", tok.token_to_id("</s>"))],
    )
    return PreTrainedTokenizerFast(
        tokenizer_object=tok,
        pad_token="<pad>",
        bos_token="<s>",
        eos_token="</s>",
        unk_token="<unk>",
    )


def tiny_model_config(vocab_size: int, dropout_rate: float, max_positions: int) -> BartConfig:
    return BartConfig(
        vocab_size=vocab_size,
        d_model=64,
        encoder_layers=2,
        decoder_layers=2,
        encoder_attention_heads=2,
        decoder_attention_heads=2,
        encoder_ffn_dim=128,
        decoder_ffn_dim=128,
        max_position_embeddings=max_positions,
        dropout=dropout_rate,
        attention_dropout=dropout_rate,
        activation_dropout=dropout_rate,
        pad_token_id=0,
        bos_token_id=1,
        eos_token_id=2,
        decoder_start_token_id=1,
        forced_eos_token_id=None,
    )


def build_tiny(
    tokenizer: PreTrainedTokenizerFast, dropout_rate: float, config: BridgeConfig
) -> BartForConditionalGeneration:
    max_positions = max(config.max_input_tokens, config.max_output_tokens) + 8
    model_config = tiny_model_config(len(tokenizer), dropout_rate, max_positions)
    torch.manual_seed(PRISTINE_INIT_SEED)
    model = BartForConditionalGeneration(model_config)
    return model.to(config.device)


def load_checkpoint(model_id: str, dropout_rate: Optional[float], config: BridgeConfig):
    """Fresh (tokenizer, model) pair from a checkpoint, with the dropout
    probabilities overridden when a rate is given. Reloading per train is the
    pristine-weights guarantee."""
    try:
        tokenizer = AutoTokenizer.from_pretrained(model_id)
        model_config = AutoConfig.from_pretrained(model_id)
        if dropout_rate is not None:
            for key in _DROPOUT_KEYS:
                if hasattr(model_config, key):
                    setattr(model_config, key, dropout_rate)
        model = AutoModelForSeq2SeqLM.from_pretrained(model_id, config=model_config)
    except Exception as exc:
        raise ModelLoadError(f"cannot load model {model_id!r}: {exc}") from exc
    return tokenizer, model.to(config.device)


def _encode(tokenizer, texts: Sequence[str], max_length: int, device: str):
    return tokenizer(
        list(texts), padding=True, truncation=True, max_length=max_length, return_tensors="pt"
    ).to(device)


def _label_ids(tokenizer, summaries: Sequence[str], max_length: int, device: str) -> torch.Tensor:
    enc = _encode(tokenizer, summaries, max_length, device)
    labels = enc.input_ids
    if labels.shape[1] > 1 and (labels[:, 0] == tokenizer.bos_token_id).all():
        labels = labels[:, 1:]  # decoder start is prepended by the model
    labels = labels.clone()
    labels[labels == tokenizer.pad_token_id] = -100
    return labels


def _batches(items: Sequence, size: int = 8):
    for i in range(0, len(items), size):
        yield items[i : i + size]


def _mean_loss(model, tokenizer, examples, config: BridgeConfig) -> float:
    total, count = 0.0, 0
    model.eval()
    with torch.no_grad():
        for batch in _batches(examples):
            enc = _encode(tokenizer, [e["text"] for e in batch], config.max_input_tokens, config.device)
            labels = _label_ids(tokenizer, [e["summary"] for e in batch], config.max_output_tokens, config.device)
            loss = model(input_ids=enc.input_ids, attention_mask=enc.attention_mask, labels=labels).loss
            total += float(loss) * len(batch)
            count += len(batch)
    return total / count


def fine_tune(
    model,
    tokenizer,
    labeled: Sequence[dict],
    validation: Sequence[dict],
    max_epochs: int,
    patience: int,
    base_seed: int,
    config: BridgeConfig,
) -> int:
    """Fit on `labeled`, early-stopping on validation loss; returns the
    number of epochs actually run (>= 1). Restores the best-validation
    weights. Without validation examples there is no stopping signal, so all
    `max_epochs` run."""
    torch.manual_seed(base_seed)
    optimizer = torch.optim.AdamW(model.parameters(), lr=3e-3)
    best_val = float("inf")
    best_state = None
    stale = 0
    epochs_run = 0
    for _ in range(max(1, max_epochs)):
        model.train()
        for batch in _batches(labeled):
            enc = _encode(tokenizer, [e["text"] for e in batch], config.max_input_tokens, config.device)
            labels = _label_ids(tokenizer, [e["summary"] for e in batch], config.max_output_tokens, config.device)
            loss = model(input_ids=enc.input_ids, attention_mask=enc.attention_mask, labels=labels).loss
            loss.backward()
            optimizer.step()
            optimizer.zero_grad()
        epochs_run += 1
        if validation:
            val_loss = _mean_loss(model, tokenizer, validation, config)
            if val_loss < best_val - 1e-6:
                best_val = val_loss
                best_state = {k: v.detach().clone() for k, v in model.state_dict().items()}
                stale = 0
            else:
                stale += 1
                if stale >= patience:
                    break
    if best_state is not None:
        model.load_state_dict(best_state)
    model.eval()
    return epochs_run


class Summarizer:
    """One trained model plus everything needed to answer generate requests."""

    def __init__(self, model, tokenizer, beam_size: int, dropout_rate: float, config: BridgeConfig):
        self.model = model
        self.tokenizer = tokenizer
        self.beam_size = beam_size
        self.dropout_rate = dropout_rate
        self.config = config

    def _generate(self, text: str) -> str:
        enc = _encode(self.tokenizer, [text], self.config.max_input_tokens, self.config.device)
        ids = self.model.generate(
            enc.input_ids,
            attention_mask=enc.attention_mask,
            num_beams=self.beam_size,
            min_new_tokens=1,
            max_new_tokens=self.config.max_output_tokens,
            do_sample=False,
        )
        return self.tokenizer.decode(ids[0], skip_special_tokens=True).strip()

    def summarize(self, text: str) -> str:
        self.model.eval()
        return self._generate(text)

    def summarize_stochastic(self, text: str, n: int, seed: int, doc_id: str) -> list[str]:
        # Dropout stays active during these forward passes; each sample runs
        # under its protocol-fixed sub-seed so batches replay exactly.
        if self.config.mc_dropout:
            self.model.train()
        else:
            self.model.eval()
        try:
            out = []
            for j in range(n):
                torch.manual_seed(subsample_seed(seed, doc_id, j))
                out.append(self._generate(text))
            return out
        finally:
            self.model.eval()
