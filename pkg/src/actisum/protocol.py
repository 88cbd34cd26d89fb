"""Learner contract and its line-delimited wire protocol.

A learner exposes three operations: train from scratch on the full labeled
set, deterministic generation, and seeded stochastic generation. The engine
talks to external learners over a child process carrying one JSON request per
line and one JSON response per line, in strict alternation; the built-in toy
learner implements the same interface in process. The engine owns the
uncertainty computation; learners only emit raw summaries.

Wire schema (see docs/wire_protocol.md for the full contract):

  {"op":"train","labeled":[{"id","text","summary"},...],"validation":[...],
   "config":{...}}                      -> {"ok":true,"model":"<token>","epochs":N}
  {"op":"generate","model":"<token>","text":"...","stochastic":false}
                                        -> {"ok":true,"summaries":["..."]}
  stochastic generate adds "stochastic":true,"n":N,"seed":S,"doc_id":"..."
  {"op":"shutdown"}                     -> {"ok":true}
  any failure                           -> {"ok":false,"error":"<code>","message":"..."}

Sample j of a stochastic batch must be produced with the sub-seed
seeding.subsample_seed(seed, doc_id, j); that derivation is part of the
protocol so external learners reproduce batches exactly.
"""

from __future__ import annotations

import json
import shlex
import subprocess
import sys
from abc import ABC, abstractmethod
from dataclasses import asdict, dataclass
from typing import IO, Optional, Sequence

from actisum.corpus import LabeledExample
from actisum.errors import LearnerContractError, TransportError, WireProtocolError

ERROR_BAD_REQUEST = "bad_request"
ERROR_CONTRACT = "contract"
ERROR_STALE_MODEL = "stale_model"
ERROR_INTERNAL = "internal"


@dataclass(frozen=True)
class LearnerConfig:
    beam_size: int = 3
    max_epochs: int = 10
    patience: int = 4
    dropout_rate: float = 0.1
    base_seed: int = 0

    def __post_init__(self) -> None:
        if self.beam_size < 1:
            raise ValueError(f"beam_size must be >= 1, got {self.beam_size}")
        if self.patience > self.max_epochs:
            raise ValueError(
                f"patience ({self.patience}) must not exceed max_epochs ({self.max_epochs})"
            )
        if not 0.0 <= self.dropout_rate < 1.0:
            raise ValueError(f"dropout_rate must be in [0, 1), got {self.dropout_rate}")

    def to_wire(self) -> dict:
        return asdict(self)

    @classmethod
    def from_wire(cls, obj: dict) -> "LearnerConfig":
        known = {f: obj[f] for f in cls.__dataclass_fields__ if f in obj}
        return cls(**known)


@dataclass(frozen=True)
class ModelHandle:
    """Opaque token for a trained model instance; valid until the next train
    call on the same learner. `generation` counts train calls, starting at 0."""

    token: str
    generation: int


@dataclass(frozen=True)
class StochasticBatch:
    doc_id: str
    summaries: tuple[str, ...]


class Learner(ABC):
    """Abstract learner. Implementations must retrain from scratch on every
    train call and report the epoch count via `last_train_epochs` (1 for
    learners without an epoch notion)."""

    last_train_epochs: int = 0

    @abstractmethod
    def train(
        self,
        labeled: Sequence[LabeledExample],
        validation: Sequence[LabeledExample],
        config: LearnerConfig,
    ) -> ModelHandle: ...

    @abstractmethod
    def generate(self, handle: ModelHandle, text: str) -> str: ...

    @abstractmethod
    def generate_stochastic(
        self, handle: ModelHandle, doc_id: str, text: str, n: int, seed: int
    ) -> StochasticBatch: ...

    def close(self) -> None:
        pass

    def __enter__(self) -> "Learner":
        return self

    def __exit__(self, *exc) -> None:
        self.close()


def _example_to_wire(ex: LabeledExample) -> dict:
    return {"id": ex.doc_id, "text": ex.text, "summary": ex.summary}


def _example_from_wire(obj: dict) -> LabeledExample:
    if not isinstance(obj, dict):
        raise WireProtocolError("labeled example must be an object")
    for field in ("id", "text", "summary"):
        if not isinstance(obj.get(field), str):
            raise WireProtocolError(f"labeled example field {field!r} must be a string")
    return LabeledExample(doc_id=obj["id"], text=obj["text"], summary=obj["summary"])


def encode_message(obj: dict) -> str:
    """One protocol message as a single line (no trailing newline)."""
    return json.dumps(obj, ensure_ascii=False, separators=(",", ":"))


def decode_message(line: str) -> dict:
    try:
        obj = json.loads(line)
    except json.JSONDecodeError as exc:
        raise WireProtocolError(f"malformed message: {exc}") from exc
    if not isinstance(obj, dict):
        raise WireProtocolError("message must be a JSON object")
    return obj


def _error_response(code: str, message: str) -> dict:
    return {"ok": False, "error": code, "message": message}


def _handle_request(learner: Learner, req: dict, state: dict) -> dict:
    op = req.get("op")
    if op == "train":
        labeled_raw = req.get("labeled")
        validation_raw = req.get("validation", [])
        if not isinstance(labeled_raw, list) or not isinstance(validation_raw, list):
            return _error_response(ERROR_BAD_REQUEST, "train needs `labeled` and `validation` lists")
        if not labeled_raw:
            return _error_response(ERROR_CONTRACT, "labeled set must be non-empty")
        labeled = [_example_from_wire(o) for o in labeled_raw]
        validation = [_example_from_wire(o) for o in validation_raw]
        config = LearnerConfig.from_wire(req.get("config") or {})
        handle = learner.train(labeled, validation, config)
        state["model"] = handle
        return {"ok": True, "model": handle.token, "epochs": learner.last_train_epochs}

    if op == "generate":
        token = req.get("model")
        text = req.get("text")
        if not isinstance(token, str) or not isinstance(text, str):
            return _error_response(ERROR_BAD_REQUEST, "generate needs string `model` and `text`")
        handle = state.get("model")
        if handle is None or handle.token != token:
            return _error_response(ERROR_STALE_MODEL, f"unknown or stale model token {token!r}")
        if req.get("stochastic"):
            n = req.get("n")
            seed = req.get("seed")
            doc_id = req.get("doc_id")
            if not isinstance(n, int) or not isinstance(seed, int) or not isinstance(doc_id, str):
                return _error_response(
                    ERROR_BAD_REQUEST, "stochastic generate needs int `n`, int `seed`, string `doc_id`"
                )
            if n < 2:
                return _error_response(ERROR_CONTRACT, f"stochastic generate needs n >= 2, got {n}")
            batch = learner.generate_stochastic(handle, doc_id, text, n, seed)
            return {"ok": True, "summaries": list(batch.summaries)}
        summary = learner.generate(handle, text)
        return {"ok": True, "summaries": [summary]}

    return _error_response(ERROR_BAD_REQUEST, f"unknown op {op!r}")


def serve(learner: Learner, infile: Optional[IO[str]] = None, outfile: Optional[IO[str]] = None) -> None:
    """Serve a learner over line-delimited stdio until EOF or a shutdown op.

    Every request gets exactly one response line; contract and schema errors
    are reported as ok:false responses, never by killing the process.
    """
    infile = infile if infile is not None else sys.stdin
    outfile = outfile if outfile is not None else sys.stdout
    state: dict = {}
    for line in infile:
        line = line.strip()
        if not line:
            continue
        try:
            req = decode_message(line)
        except WireProtocolError as exc:
            resp = _error_response(ERROR_BAD_REQUEST, str(exc))
        else:
            if req.get("op") == "shutdown":
                outfile.write(encode_message({"ok": True}) + "\n")
                outfile.flush()
                break
            try:
                resp = _handle_request(learner, req, state)
            except (WireProtocolError, ValueError) as exc:
                resp = _error_response(ERROR_BAD_REQUEST, str(exc))
            except LearnerContractError as exc:
                resp = _error_response(ERROR_CONTRACT, str(exc))
            except Exception as exc:  # noqa: BLE001 - report, keep serving
                resp = _error_response(ERROR_INTERNAL, f"{type(exc).__name__}: {exc}")
        outfile.write(encode_message(resp) + "\n")
        outfile.flush()
    learner.close()


def self_learner_command() -> list[str]:
    """Command line that re-invokes this package in learner-serve mode."""
    return [sys.executable, "-m", "actisum", "learner-serve"]


def resolve_learner_command(cmd: str) -> list[str]:
    if cmd.strip() == "self":
        return self_learner_command()
    return shlex.split(cmd)


class SubprocessLearner(Learner):
    """Wire-protocol client around one learner child process.

    Requests and responses alternate strictly; at most one request is ever
    outstanding, so a single instance must not be shared across threads.
    """

    def __init__(self, cmd: str | Sequence[str]):
        argv = resolve_learner_command(cmd) if isinstance(cmd, str) else list(cmd)
        self._argv = argv
        self._proc = subprocess.Popen(
            argv,
            stdin=subprocess.PIPE,
            stdout=subprocess.PIPE,
            stderr=subprocess.PIPE,
            text=True,
            encoding="utf-8",
        )
        self._train_count = 0
        self.last_train_epochs = 0

    def _diagnostics(self) -> str:
        stderr_tail = ""
        if self._proc.stderr is not None:
            try:
                stderr_tail = self._proc.stderr.read() or ""
            except Exception:
                stderr_tail = ""
        code = self._proc.poll()
        return f"command={self._argv!r} returncode={code} stderr: {stderr_tail.strip()[-2000:]}"

    def _request(self, obj: dict) -> dict:
        if self._proc.poll() is not None:
            raise TransportError(f"learner process is not running; {self._diagnostics()}")
        try:
            self._proc.stdin.write(encode_message(obj) + "\n")
            self._proc.stdin.flush()
            line = self._proc.stdout.readline()
        except (BrokenPipeError, OSError) as exc:
            raise TransportError(f"learner pipe broke: {exc}; {self._diagnostics()}") from exc
        if not line:
            raise TransportError(f"learner closed its stdout; {self._diagnostics()}")
        resp = decode_message(line)
        if not resp.get("ok"):
            code = resp.get("error", "unknown")
            message = resp.get("message", "")
            if code == ERROR_CONTRACT:
                raise LearnerContractError(f"learner rejected request: {message}")
            raise WireProtocolError(f"learner error [{code}]: {message}")
        return resp

    def train(self, labeled, validation, config: LearnerConfig) -> ModelHandle:
        resp = self._request(
            {
                "op": "train",
                "labeled": [_example_to_wire(ex) for ex in labeled],
                "validation": [_example_to_wire(ex) for ex in validation],
                "config": config.to_wire(),
            }
        )
        token = resp.get("model")
        if not isinstance(token, str):
            raise WireProtocolError("train response lacks a string `model` token")
        self.last_train_epochs = int(resp.get("epochs", 0))
        handle = ModelHandle(token=token, generation=self._train_count)
        self._train_count += 1
        return handle

    def generate(self, handle: ModelHandle, text: str) -> str:
        resp = self._request(
            {"op": "generate", "model": handle.token, "text": text, "stochastic": False}
        )
        summaries = resp.get("summaries")
        if not isinstance(summaries, list) or len(summaries) != 1:
            raise WireProtocolError("generate response must carry exactly one summary")
        return summaries[0]

    def generate_stochastic(
        self, handle: ModelHandle, doc_id: str, text: str, n: int, seed: int
    ) -> StochasticBatch:
        if n < 2:
            raise ValueError(f"stochastic generation needs n >= 2, got {n}")
        resp = self._request(
            {
                "op": "generate",
                "model": handle.token,
                "text": text,
                "stochastic": True,
                "n": n,
                "seed": seed,
                "doc_id": doc_id,
            }
        )
        summaries = resp.get("summaries")
        if not isinstance(summaries, list) or len(summaries) != n:
            raise WireProtocolError(f"expected {n} summaries, got {summaries!r}")
        return StochasticBatch(doc_id=doc_id, summaries=tuple(summaries))

    def close(self) -> None:
        if self._proc.poll() is None:
            try:
                self._proc.stdin.write(encode_message({"op": "shutdown"}) + "\n")
                self._proc.stdin.flush()
            except (BrokenPipeError, OSError):
                pass
            try:
                self._proc.wait(timeout=10)
            except subprocess.TimeoutExpired:
                self._proc.kill()
                self._proc.wait()
        for stream in (self._proc.stdin, self._proc.stdout, self._proc.stderr):
            if stream is not None:
                try:
                    stream.close()
                except OSError:
                    pass
