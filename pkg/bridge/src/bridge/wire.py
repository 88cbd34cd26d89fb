"""Line-delimited JSON request loop.

Implements the learner wire protocol independently of the engine package:
one JSON object per line in strict alternation, ops train / generate /
shutdown, failures reported as {"ok": false, "error": code, "message": ...}
without ever killing the loop. See the engine's docs/wire_protocol.md for
the authoritative schema.
"""

from __future__ import annotations

import json
import sys
from typing import IO, Optional

from bridge.learner import BridgeLearner
from bridge.model import ModelLoadError

ERROR_BAD_REQUEST = "bad_request"
ERROR_CONTRACT = "contract"
ERROR_STALE_MODEL = "stale_model"
ERROR_INTERNAL = "internal"


def _error(code: str, message: str) -> dict:
    return {"ok": False, "error": code, "message": message}


def _parse_examples(raw: list) -> list[dict]:
    examples = []
    for item in raw:
        if not isinstance(item, dict) or not all(
            isinstance(item.get(f), str) for f in ("id", "text", "summary")
        ):
            raise ValueError("labeled example needs string id/text/summary")
        examples.append({"id": item["id"], "text": item["text"], "summary": item["summary"]})
    return examples


def _handle(learner: BridgeLearner, req: dict) -> dict:
    op = req.get("op")
    if op == "train":
        labeled_raw = req.get("labeled")
        validation_raw = req.get("validation", [])
        if not isinstance(labeled_raw, list) or not isinstance(validation_raw, list):
            return _error(ERROR_BAD_REQUEST, "train needs `labeled` and `validation` lists")
        if not labeled_raw:
            return _error(ERROR_CONTRACT, "labeled set must be non-empty")
        config = req.get("config") or {}
        if not isinstance(config, dict):
            return _error(ERROR_BAD_REQUEST, "config must be an object")
        token, epochs = learner.train(
            _parse_examples(labeled_raw), _parse_examples(validation_raw), config
        )
        return {"ok": True, "model": token, "epochs": epochs}

    if op == "generate":
        token = req.get("model")
        text = req.get("text")
        if not isinstance(token, str) or not isinstance(text, str):
            return _error(ERROR_BAD_REQUEST, "generate needs string `model` and `text`")
        if learner.current_token is None or token != learner.current_token:
            return _error(ERROR_STALE_MODEL, f"unknown or stale model token {token!r}")
        if req.get("stochastic"):
            n, seed, doc_id = req.get("n"), req.get("seed"), req.get("doc_id")
            if not isinstance(n, int) or not isinstance(seed, int) or not isinstance(doc_id, str):
                return _error(
                    ERROR_BAD_REQUEST, "stochastic generate needs int `n`, int `seed`, string `doc_id`"
                )
            if n < 2:
                return _error(ERROR_CONTRACT, f"stochastic generate needs n >= 2, got {n}")
            return {"ok": True, "summaries": learner.generate_stochastic(text, n, seed, doc_id)}
        return {"ok": True, "summaries": [learner.generate(text)]}

    return _error(ERROR_BAD_REQUEST, f"unknown op {op!r}")


def serve(learner: BridgeLearner, infile: Optional[IO[str]] = None, outfile: Optional[IO[str]] = None) -> None:
    infile = infile if infile is not None else sys.stdin
    outfile = outfile if outfile is not None else sys.stdout
    for line in infile:
        line = line.strip()
        if not line:
            continue
        try:
            req = json.loads(line)
            if not isinstance(req, dict):
                raise ValueError("message must be a JSON object")
        except ValueError as exc:
            resp = _error(ERROR_BAD_REQUEST, f"malformed message: {exc}")
        else:
            if req.get("op") == "shutdown":
                outfile.write(json.dumps({"ok": True}, separators=(",", ":")) + "\n")
                outfile.flush()
                break
            try:
                resp = _handle(learner, req)
            except ValueError as exc:
                resp = _error(ERROR_BAD_REQUEST, str(exc))
            except ModelLoadError as exc:
                resp = _error(ERROR_INTERNAL, str(exc))
            except Exception as exc:  # noqa: BLE001 - report, keep serving
                resp = _error(ERROR_INTERNAL, f"{type(exc).__name__}: {exc}")
        outfile.write(json.dumps(resp, ensure_ascii=False, separators=(",", ":")) + "\n")
        outfile.flush()
    learner.close()
