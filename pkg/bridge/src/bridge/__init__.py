"""Protocol learner backed by a real encoder-decoder summarization model.

Serves the line-delimited JSON learner protocol (see the engine package's
docs/wire_protocol.md) around a torch seq2seq model: training requests
fine-tune from pristine weights with early stopping, deterministic requests
beam-search with dropout off, and stochastic requests keep dropout active at
inference, seeding the RNG per sample with the protocol's sub-seed.
"""

from bridge.config import BridgeConfig
from bridge.learner import BridgeLearner
from bridge.wire import serve

__all__ = ["BridgeConfig", "BridgeLearner", "serve"]
