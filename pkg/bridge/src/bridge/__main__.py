"""Entry point: python -m bridge --model <id-or-path>"""

from __future__ import annotations

import argparse

from bridge.config import BridgeConfig
from bridge.learner import BridgeLearner
from bridge.wire import serve


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="python -m bridge",
        description="serve a seq2seq summarization model over the learner wire protocol",
    )
    parser.add_argument("--model", default="tiny",
                        help='checkpoint path or hub id, or "tiny" for a self-contained random-init model')
    parser.add_argument("--device", default="cpu")
    parser.add_argument("--max-input-tokens", type=int, default=64)
    parser.add_argument("--max-output-tokens", type=int, default=16)
    parser.add_argument("--beam-size", type=int, default=3,
                        help="fallback beam width when a train request carries none")
    parser.add_argument("--no-mc-dropout", action="store_true",
                        help="keep dropout off even for stochastic requests")
    parser.add_argument("--dropout-rate", type=float, default=None,
                        help="override the checkpoint's dropout probabilities")
    args = parser.parse_args(argv)

    import transformers

    transformers.logging.set_verbosity_error()  # keep stderr readable; stdout is protocol-only
    config = BridgeConfig(
        model=args.model,
        device=args.device,
        max_input_tokens=args.max_input_tokens,
        max_output_tokens=args.max_output_tokens,
        beam_size=args.beam_size,
        mc_dropout=not args.no_mc_dropout,
        dropout_rate=args.dropout_rate,
    )
    BridgeLearner.setup_runtime()
    serve(BridgeLearner(config))
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
