"""Acquisition-loop driver: warm start, then alternate select/annotate/retrain
until the labeling budget is spent.

Randomness is split into purpose-labeled streams derived from one master seed
(pool split, per-step candidate sampling, per-step stochastic generation,
per-step random selection, learner training), so switching the policy from
random to uncertainty-driven never perturbs the data partition it is being
compared on.
"""

from __future__ import annotations

import csv
import json
import time
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Optional, Sequence

from actisum.acquisition import (
    POLICY_BAS,
    POLICY_RANDOM,
    AcquisitionPolicy,
    apply_threshold,
    random_select,
    score_candidates,
    score_candidates_parallel,
    select,
)
from actisum.corpus import (
    Document,
    PoolState,
    annotate,
    initialize_pool,
    load_corpus,
    sample_candidates,
)
from actisum.errors import ConfigError, EngineError
from actisum.metrics import RougeScore, rouge_l, rouge_n, tokenize
from actisum.protocol import Learner, LearnerConfig, ModelHandle, SubprocessLearner
from actisum.seeding import derive_seed
from actisum.toy import ToyLearner

EVAL_METRICS = ("rouge1", "rouge2", "rougeL")


@dataclass(frozen=True)
class ExperimentConfig:
    budget: int
    validation_size: int
    warm_start_size: int
    policy: AcquisitionPolicy
    learner: LearnerConfig = LearnerConfig()
    learner_cmd: Optional[str] = None
    seed: int = 0
    eval_every_step: bool = False
    test_path: Optional[str] = None
    max_empty_steps: int = 10
    workers: int = 1

    def __post_init__(self) -> None:
        if self.budget < 0 or self.validation_size < 0 or self.warm_start_size < 0:
            raise ConfigError("budget, validation_size and warm_start_size must be >= 0")
        if self.warm_start_size > self.budget:
            raise ConfigError(
                f"warm_start_size ({self.warm_start_size}) exceeds budget ({self.budget})"
            )
        if self.warm_start_size < 1:
            raise ConfigError("warm_start_size must be >= 1 (the learner needs data to start)")
        if self.workers < 1:
            raise ConfigError(f"workers must be >= 1, got {self.workers}")
        if self.max_empty_steps < 1:
            raise ConfigError(f"max_empty_steps must be >= 1, got {self.max_empty_steps}")
        if self.eval_every_step and not self.test_path:
            raise ConfigError("eval_every_step requires test_path")


_FLAT_DEFAULTS = {
    "budget": 800,
    "validation_size": 100,
    "warm_start_size": 50,
    "policy": POLICY_BAS,
    "k": 100,
    "s": 10,
    "n": 10,
    "tau": 0.96,
    "learner_cmd": None,
    "seed": 0,
    "eval_every_step": False,
    "test_path": None,
    "max_empty_steps": 10,
    "workers": 1,
    "beam_size": 3,
    "max_epochs": 10,
    "patience": 4,
    "dropout_rate": 0.1,
}


def config_from_flat(flat: dict) -> ExperimentConfig:
    """Build a config from a flat key/value mapping (the CLI config format).
    Unknown keys are rejected so typos do not silently fall back to defaults."""
    unknown = set(flat) - set(_FLAT_DEFAULTS)
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    merged = {**_FLAT_DEFAULTS, **flat}
    policy = AcquisitionPolicy(
        kind=merged["policy"],
        k=merged["k"],
        s=merged["s"],
        n=merged["n"],
        tau=merged["tau"],
    )
    learner = LearnerConfig(
        beam_size=merged["beam_size"],
        max_epochs=merged["max_epochs"],
        patience=merged["patience"],
        dropout_rate=merged["dropout_rate"],
        base_seed=0,
    )
    return ExperimentConfig(
        budget=merged["budget"],
        validation_size=merged["validation_size"],
        warm_start_size=merged["warm_start_size"],
        policy=policy,
        learner=learner,
        learner_cmd=merged["learner_cmd"],
        seed=merged["seed"],
        eval_every_step=merged["eval_every_step"],
        test_path=merged["test_path"],
        max_empty_steps=merged["max_empty_steps"],
        workers=merged["workers"],
    )


def config_to_flat(config: ExperimentConfig) -> dict:
    return {
        "budget": config.budget,
        "validation_size": config.validation_size,
        "warm_start_size": config.warm_start_size,
        "policy": config.policy.kind,
        "k": config.policy.k,
        "s": config.policy.s,
        "n": config.policy.n,
        "tau": config.policy.tau,
        "learner_cmd": config.learner_cmd,
        "seed": config.seed,
        "eval_every_step": config.eval_every_step,
        "test_path": config.test_path,
        "max_empty_steps": config.max_empty_steps,
        "workers": config.workers,
        "beam_size": config.learner.beam_size,
        "max_epochs": config.learner.max_epochs,
        "patience": config.learner.patience,
        "dropout_rate": config.learner.dropout_rate,
    }


@dataclass(frozen=True)
class StepTimings:
    scoring_seconds: float
    training_seconds: float
    total_seconds: float


@dataclass(frozen=True)
class StepRecord:
    step: int
    selected_ids: tuple[str, ...]
    filtered_ids: tuple[str, ...]
    labeled_size_after: int
    timings: StepTimings
    candidates_scored: int
    mean_selected_bleuvar: Optional[float] = None
    eval: Optional[dict[str, RougeScore]] = None


@dataclass(frozen=True)
class UncertaintyRow:
    step: int
    doc_id: str
    bleuvar: float
    selected: bool
    filtered: bool


@dataclass
class RunResult:
    config: ExperimentConfig
    warm_start: StepRecord
    steps: list[StepRecord]
    uncertainty: list[UncertaintyRow]
    final_labeled_ids: tuple[str, ...]
    warm_start_ids: tuple[str, ...]

    @property
    def all_records(self) -> list[StepRecord]:
        return [self.warm_start, *self.steps]


def _make_learners(config: ExperimentConfig) -> list[Learner]:
    count = config.workers
    if config.learner_cmd is None:
        return [ToyLearner() for _ in range(count)]
    return [SubprocessLearner(config.learner_cmd) for _ in range(count)]


def _load_test_set(config: ExperimentConfig) -> list[Document]:
    if not config.eval_every_step:
        return []
    docs = load_corpus(config.test_path)
    missing = [d.id for d in docs if d.reference is None]
    if missing:
        raise ConfigError(
            f"test corpus has {len(missing)} documents without a reference summary "
            f"(first: {missing[0]!r})"
        )
    return docs


def evaluate(learner: Learner, handle: ModelHandle, test_docs: Sequence[Document]) -> dict[str, RougeScore]:
    """Mean ROUGE-1/2/L precision, recall and F1 of deterministic summaries
    over the test set."""
    if not test_docs:
        raise ValueError("cannot evaluate on an empty test set")
    sums = {m: [0.0, 0.0, 0.0] for m in EVAL_METRICS}
    for doc in test_docs:
        cand = tokenize(learner.generate(handle, doc.text))
        ref = tokenize(doc.reference)
        for name, score in (
            ("rouge1", rouge_n(cand, ref, 1)),
            ("rouge2", rouge_n(cand, ref, 2)),
            ("rougeL", rouge_l(cand, ref)),
        ):
            sums[name][0] += score.precision
            sums[name][1] += score.recall
            sums[name][2] += score.f1
    n = len(test_docs)
    return {
        m: RougeScore(precision=v[0] / n, recall=v[1] / n, f1=v[2] / n)
        for m, v in sums.items()
    }


def _train_all(
    learners: Sequence[Learner], pool: PoolState, config: ExperimentConfig
) -> tuple[list[ModelHandle], float]:
    """Retrain every worker from scratch on the current labeled set. Returns
    the handles plus the summed wall time (the actual training cost paid)."""
    learner_config = replace(config.learner, base_seed=derive_seed(config.seed, "learner"))
    handles = []
    started = time.perf_counter()
    for learner in learners:
        handles.append(learner.train(pool.labeled, pool.validation, learner_config))
    return handles, time.perf_counter() - started


def run(config: ExperimentConfig, corpus: Sequence[Document]) -> RunResult:
    pool = initialize_pool(
        corpus,
        v=config.validation_size,
        s0=config.warm_start_size,
        seed=derive_seed(config.seed, "pool-split"),
        budget=config.budget,
    )
    warm_start_ids = tuple(ex.doc_id for ex in pool.labeled)
    test_docs = _load_test_set(config)
    learners = _make_learners(config)
    try:
        return _run_loop(config, pool, learners, test_docs, warm_start_ids)
    finally:
        for learner in learners:
            learner.close()


def _run_loop(
    config: ExperimentConfig,
    pool: PoolState,
    learners: list[Learner],
    test_docs: list[Document],
    warm_start_ids: tuple[str, ...],
) -> RunResult:
    policy = config.policy

    step_started = time.perf_counter()
    handles, train_seconds = _train_all(learners, pool, config)
    last_eval = evaluate(learners[0], handles[0], test_docs) if test_docs else None
    warm_record = StepRecord(
        step=0,
        selected_ids=warm_start_ids,
        filtered_ids=(),
        labeled_size_after=pool.labeled_size,
        timings=StepTimings(
            scoring_seconds=0.0,
            training_seconds=train_seconds,
            total_seconds=time.perf_counter() - step_started,
        ),
        candidates_scored=0,
        eval=last_eval,
    )

    steps: list[StepRecord] = []
    uncertainty: list[UncertaintyRow] = []
    empty_streak = 0
    step = 0
    while pool.labeled_size < config.budget and pool.unlabeled_size > 0:
        step += 1
        step_started = time.perf_counter()
        s_clamped = min(policy.s, config.budget - pool.labeled_size)
        scoring_seconds = 0.0
        filtered_ids: tuple[str, ...] = ()
        mean_selected: Optional[float] = None
        candidates_scored = 0

        if policy.kind == POLICY_RANDOM:
            selected_ids = tuple(
                random_select(pool, s_clamped, derive_seed(config.seed, "random-select", step))
            )
        else:
            candidates = sample_candidates(pool, policy.k, derive_seed(config.seed, "candidates", step))
            candidates_scored = len(candidates)
            mc_seed = derive_seed(config.seed, "mc", step)
            scoring_started = time.perf_counter()
            if len(learners) > 1:
                records = score_candidates_parallel(
                    list(zip(learners, handles)), candidates, policy.n, mc_seed
                )
            else:
                records = score_candidates(learners[0], handles[0], candidates, policy.n, mc_seed)
            scoring_seconds = time.perf_counter() - scoring_started
            records = apply_threshold(records, policy.tau)
            selected_ids = tuple(select(records, s_clamped, policy.tau))
            filtered_ids = tuple(r.doc_id for r in records if r.filtered)
            selected_set = set(selected_ids)
            by_id = {r.doc_id: r for r in records}
            uncertainty.extend(
                UncertaintyRow(
                    step=step,
                    doc_id=r.doc_id,
                    bleuvar=r.bleuvar,
                    selected=r.doc_id in selected_set,
                    filtered=r.filtered,
                )
                for r in records
            )
            if selected_ids:
                mean_selected = sum(by_id[i].bleuvar for i in selected_ids) / len(selected_ids)

        if not selected_ids:
            empty_streak += 1
            if empty_streak >= config.max_empty_steps:
                raise EngineError(
                    f"aborting at step {step}: {empty_streak} consecutive steps selected "
                    f"nothing (all {candidates_scored} candidates filtered as noise each "
                    f"time; tau={policy.tau}, labeled={pool.labeled_size}, "
                    f"budget={config.budget})"
                )
            steps.append(
                StepRecord(
                    step=step,
                    selected_ids=(),
                    filtered_ids=filtered_ids,
                    labeled_size_after=pool.labeled_size,
                    timings=StepTimings(
                        scoring_seconds=scoring_seconds,
                        training_seconds=0.0,
                        total_seconds=time.perf_counter() - step_started,
                    ),
                    candidates_scored=candidates_scored,
                    eval=last_eval,
                )
            )
            continue

        empty_streak = 0
        annotate(pool, selected_ids)
        handles, train_seconds = _train_all(learners, pool, config)
        if test_docs:
            last_eval = evaluate(learners[0], handles[0], test_docs)
        steps.append(
            StepRecord(
                step=step,
                selected_ids=selected_ids,
                filtered_ids=filtered_ids,
                labeled_size_after=pool.labeled_size,
                timings=StepTimings(
                    scoring_seconds=scoring_seconds,
                    training_seconds=train_seconds,
                    total_seconds=time.perf_counter() - step_started,
                ),
                candidates_scored=candidates_scored,
                mean_selected_bleuvar=mean_selected,
                eval=last_eval,
            )
        )

    return RunResult(
        config=config,
        warm_start=warm_record,
        steps=steps,
        uncertainty=uncertainty,
        final_labeled_ids=tuple(ex.doc_id for ex in pool.labeled),
        warm_start_ids=warm_start_ids,
    )


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, float):
        return f"{value:.12g}"
    return str(value)


def write_trajectory(path: Path, result: RunResult) -> None:
    """One row per record, warm start included as step 0. Timing fields live
    in timings.csv so this file is byte-stable across reruns."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(
            [
                "step",
                "policy",
                "labeled_size_after",
                "n_selected",
                "n_filtered",
                "mean_selected_bleuvar",
                "selected_ids",
                "rouge1_f1",
                "rouge2_f1",
                "rougeL_f1",
            ]
        )
        for rec in result.all_records:
            ev = rec.eval or {}
            writer.writerow(
                [
                    rec.step,
                    "warm_start" if rec.step == 0 else result.config.policy.kind,
                    rec.labeled_size_after,
                    len(rec.selected_ids),
                    len(rec.filtered_ids),
                    _fmt(rec.mean_selected_bleuvar),
                    ";".join(rec.selected_ids),
                    _fmt(ev["rouge1"].f1 if "rouge1" in ev else None),
                    _fmt(ev["rouge2"].f1 if "rouge2" in ev else None),
                    _fmt(ev["rougeL"].f1 if "rougeL" in ev else None),
                ]
            )


def write_uncertainty(path: Path, result: RunResult) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["step", "doc_id", "bleuvar", "selected", "filtered"])
        for row in result.uncertainty:
            writer.writerow(
                [row.step, row.doc_id, _fmt(row.bleuvar), _fmt(row.selected), _fmt(row.filtered)]
            )


def write_timings(path: Path, result: RunResult) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["step", "k", "n", "scoring_seconds", "training_seconds", "total_seconds"])
        for rec in result.all_records:
            n = result.config.policy.n if rec.candidates_scored else 0
            writer.writerow(
                [
                    rec.step,
                    rec.candidates_scored,
                    n,
                    _fmt(rec.timings.scoring_seconds),
                    _fmt(rec.timings.training_seconds),
                    _fmt(rec.timings.total_seconds),
                ]
            )


def write_config_resolved(path: Path, config: ExperimentConfig) -> None:
    flat = config_to_flat(config)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(flat, fh, indent=2, sort_keys=True)
        fh.write("\n")


def write_run_outputs(out_dir: Path, result: RunResult) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    write_trajectory(out_dir / "trajectory.csv", result)
    write_uncertainty(out_dir / "uncertainty.csv", result)
    write_timings(out_dir / "timings.csv", result)
    write_config_resolved(out_dir / "config.resolved", result.config)
