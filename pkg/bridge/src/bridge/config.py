"""Bridge-side configuration.

Loop-level settings (beam size, epoch caps, dropout rate, base seed) arrive
over the wire with each train request and bind until the next train; this
config holds what the wire does not carry: which model to wrap, where to run
it, token-length caps, and whether stochastic requests enable dropout at
inference at all.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

TINY_MODEL = "tiny"


@dataclass(frozen=True)
class BridgeConfig:
    """`model` is a checkpoint path or hub id, or "tiny" for a self-contained
    randomly initialized model whose vocabulary is built from each train
    payload. `dropout_rate` overrides the checkpoint's configured rate when
    the train request does not carry one."""

    model: str = TINY_MODEL
    device: str = "cpu"
    max_input_tokens: int = 64
    max_output_tokens: int = 16
    beam_size: int = 3
    mc_dropout: bool = True
    dropout_rate: Optional[float] = None

    def __post_init__(self) -> None:
        if self.max_input_tokens < 2 or self.max_output_tokens < 1:
            raise ValueError("token length caps must be positive")
        if self.beam_size < 1:
            raise ValueError(f"beam_size must be >= 1, got {self.beam_size}")
        if self.dropout_rate is not None and not 0.0 <= self.dropout_rate < 1.0:
            raise ValueError(f"dropout_rate must be in [0, 1), got {self.dropout_rate}")
