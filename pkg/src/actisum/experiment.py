"""Multi-seed, multi-strategy comparison runs and their report artifacts.

A matrix file names the corpus, the shared loop parameters, a list of
strategies and a list of seeds. Every (strategy, seed) cell is a full
engine run with per-step evaluation on; the report aggregates learning
curves (mean and population std over seeds), best scores under budget caps,
per-cell timings, and a histogram of the disagreement scores of selected
documents.
"""

from __future__ import annotations

import csv
import io
import json
import traceback
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from actisum.acquisition import AcquisitionPolicy
from actisum.corpus import load_corpus
from actisum.engine import (
    EVAL_METRICS,
    ExperimentConfig,
    RunResult,
    run,
    write_run_outputs,
)
from actisum.errors import ConfigError
from actisum.protocol import LearnerConfig

HIST_BINS = 20


@dataclass(frozen=True)
class StrategySpec:
    name: str
    policy: AcquisitionPolicy


@dataclass(frozen=True)
class MatrixSpec:
    corpus_path: str
    test_corpus_path: str
    budget: int
    validation_size: int
    warm_start_size: int
    strategies: tuple[StrategySpec, ...]
    seeds: tuple[int, ...]
    learner: LearnerConfig = LearnerConfig()
    learner_cmd: Optional[str] = None
    budget_caps: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        if not self.strategies:
            raise ConfigError("matrix needs at least one strategy")
        if not self.seeds:
            raise ConfigError("matrix needs at least one seed")
        names = [s.name for s in self.strategies]
        if len(set(names)) != len(names):
            raise ConfigError(f"duplicate strategy names in {names}")


def load_matrix(path: Path | str) -> MatrixSpec:
    with open(path, encoding="utf-8") as fh:
        raw = json.load(fh)
    if not isinstance(raw, dict):
        raise ConfigError("matrix file must hold a JSON object")
    try:
        strategies = tuple(
            StrategySpec(
                name=item["name"],
                policy=AcquisitionPolicy(
                    kind=item["policy"],
                    k=item.get("k", 100),
                    s=item.get("s", 10),
                    n=item.get("n", 10),
                    tau=item.get("tau", 0.96),
                ),
            )
            for item in raw["strategies"]
        )
        learner = LearnerConfig(
            beam_size=raw.get("beam_size", 3),
            max_epochs=raw.get("max_epochs", 10),
            patience=raw.get("patience", 4),
            dropout_rate=raw.get("dropout_rate", 0.1),
        )
        return MatrixSpec(
            corpus_path=raw["corpus"],
            test_corpus_path=raw["test_corpus"],
            budget=raw["budget"],
            validation_size=raw.get("validation_size", 100),
            warm_start_size=raw.get("warm_start_size", 50),
            strategies=strategies,
            seeds=tuple(raw["seeds"]),
            learner=learner,
            learner_cmd=raw.get("learner_cmd"),
            budget_caps=tuple(raw.get("budget_caps", ())),
        )
    except KeyError as exc:
        raise ConfigError(f"matrix file lacks required key {exc}") from exc


def cell_config(matrix: MatrixSpec, strategy: StrategySpec, seed: int) -> ExperimentConfig:
    return ExperimentConfig(
        budget=matrix.budget,
        validation_size=matrix.validation_size,
        warm_start_size=matrix.warm_start_size,
        policy=strategy.policy,
        learner=matrix.learner,
        learner_cmd=matrix.learner_cmd,
        seed=seed,
        eval_every_step=True,
        test_path=matrix.test_corpus_path,
    )


@dataclass
class CellOutcome:
    strategy: str
    seed: int
    result: Optional[RunResult] = None
    error: Optional[str] = None

    @property
    def ok(self) -> bool:
        return self.result is not None


@dataclass(frozen=True)
class CurvePoint:
    strategy: str
    metric: str
    labeled_size: int
    mean: float
    std: float


@dataclass(frozen=True)
class BestEntry:
    strategy: str
    metric: str
    budget_cap: int
    best_of_mean_curve: float
    mean_of_seed_bests: float
    std_of_seed_bests: float


@dataclass
class ComparisonReport:
    matrix: MatrixSpec
    cells: list[CellOutcome]
    curves: list[CurvePoint]
    bests: list[BestEntry]
    histograms: dict[str, np.ndarray]
    incomplete: bool

    def cell(self, strategy: str, seed: int) -> CellOutcome:
        for c in self.cells:
            if c.strategy == strategy and c.seed == seed:
                return c
        raise KeyError(f"no cell ({strategy!r}, {seed})")


def _seed_series(result: RunResult, metric: str) -> list[tuple[int, float]]:
    """(labeled_size, score) points of one run, warm start included.
    Zero-acquisition steps repeat the labeled size; only the last record at
    each size is kept, so the axis is strictly increasing."""
    collapsed: dict[int, float] = {}
    for rec in result.all_records:
        if rec.eval is None:
            raise ConfigError("curve aggregation needs runs with eval_every_step on")
        collapsed[rec.labeled_size_after] = rec.eval[metric].f1
    return sorted(collapsed.items())


def _value_at(series: list[tuple[int, float]], l: int) -> float:
    """Curve value at labeled size l: the score of the last point at or below
    l (curves are step functions between acquisition sizes)."""
    value = series[0][1]
    for size, score in series:
        if size > l:
            break
        value = score
    return value


def aggregate_curves(cells: Sequence[CellOutcome]) -> list[CurvePoint]:
    points: list[CurvePoint] = []
    strategies = sorted({c.strategy for c in cells if c.ok})
    for strategy in strategies:
        runs = [c.result for c in cells if c.strategy == strategy and c.ok]
        for metric in EVAL_METRICS:
            series = [_seed_series(r, metric) for r in runs]
            grid = sorted({size for s in series for size, _ in s})
            for l in grid:
                values = np.array([_value_at(s, l) for s in series])
                points.append(
                    CurvePoint(
                        strategy=strategy,
                        metric=metric,
                        labeled_size=l,
                        mean=float(values.mean()),
                        std=float(values.std()),
                    )
                )
    return points


def extract_bests(
    cells: Sequence[CellOutcome], curves: Sequence[CurvePoint], caps: Sequence[int]
) -> list[BestEntry]:
    entries: list[BestEntry] = []
    strategies = sorted({c.strategy for c in cells if c.ok})
    for strategy in strategies:
        runs = [c.result for c in cells if c.strategy == strategy and c.ok]
        for metric in EVAL_METRICS:
            mean_curve = [
                (p.labeled_size, p.mean)
                for p in curves
                if p.strategy == strategy and p.metric == metric
            ]
            for cap in caps:
                capped = [v for l, v in mean_curve if l <= cap]
                if not capped:
                    continue
                seed_bests = np.array(
                    [
                        max(v for l, v in _seed_series(r, metric) if l <= cap)
                        for r in runs
                    ]
                )
                entries.append(
                    BestEntry(
                        strategy=strategy,
                        metric=metric,
                        budget_cap=cap,
                        best_of_mean_curve=max(capped),
                        mean_of_seed_bests=float(seed_bests.mean()),
                        std_of_seed_bests=float(seed_bests.std()),
                    )
                )
    return entries


def selected_bleuvar_histogram(cells: Sequence[CellOutcome]) -> dict[str, np.ndarray]:
    """Per strategy, counts of selected documents' disagreement scores in 20
    equal-width bins over [0, 1], pooled across seeds."""
    out: dict[str, np.ndarray] = {}
    for strategy in sorted({c.strategy for c in cells if c.ok}):
        values = [
            row.bleuvar
            for c in cells
            if c.strategy == strategy and c.ok
            for row in c.result.uncertainty
            if row.selected
        ]
        counts, _ = np.histogram(values, bins=HIST_BINS, range=(0.0, 1.0))
        out[strategy] = counts
    return out


def run_matrix(matrix: MatrixSpec, workers: int = 1, out_dir: Optional[Path] = None) -> ComparisonReport:
    """Run every (strategy, seed) cell, in parallel up to `workers`. A failed
    cell is recorded with its error and skipped by aggregation; the report is
    then flagged incomplete. Per-cell run artifacts go under out_dir/runs."""
    corpus = load_corpus(matrix.corpus_path)
    cells = [
        CellOutcome(strategy=s.name, seed=seed)
        for s in matrix.strategies
        for seed in matrix.seeds
    ]
    specs = {s.name: s for s in matrix.strategies}

    def run_cell(cell: CellOutcome) -> None:
        try:
            config = cell_config(matrix, specs[cell.strategy], cell.seed)
            cell.result = run(config, corpus)
            if out_dir is not None:
                write_run_outputs(out_dir / "runs" / f"{cell.strategy}-seed{cell.seed}", cell.result)
        except Exception:
            cell.error = traceback.format_exc(limit=20)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(run_cell, cells))
    else:
        for cell in cells:
            run_cell(cell)

    cells.sort(key=lambda c: (c.strategy, c.seed))
    caps = matrix.budget_caps or (matrix.budget,)
    curves = aggregate_curves(cells)
    return ComparisonReport(
        matrix=matrix,
        cells=cells,
        curves=curves,
        bests=extract_bests(cells, curves, caps),
        histograms=selected_bleuvar_histogram(cells),
        incomplete=any(not c.ok for c in cells),
    )


def _fmt(value: float) -> str:
    # shortest representation that parses back to the same float, so the
    # report CSVs round-trip exactly
    return repr(float(value))


def _write_curves_csv(path: Path, report: ComparisonReport) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["strategy", "metric", "l", "mean", "std"])
        for p in report.curves:
            writer.writerow([p.strategy, p.metric, p.labeled_size, _fmt(p.mean), _fmt(p.std)])


def _write_best_csv(path: Path, report: ComparisonReport) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(
            [
                "strategy",
                "metric",
                "budget_cap",
                "best_of_mean_curve",
                "mean_of_seed_bests",
                "std_of_seed_bests",
            ]
        )
        for b in report.bests:
            writer.writerow(
                [
                    b.strategy,
                    b.metric,
                    b.budget_cap,
                    _fmt(b.best_of_mean_curve),
                    _fmt(b.mean_of_seed_bests),
                    _fmt(b.std_of_seed_bests),
                ]
            )


def _write_timings_csv(path: Path, report: ComparisonReport) -> None:
    """Per-cell totals; a failed cell keeps its row with status and message,
    which is how incomplete reports stay visible in the artifacts."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(
            [
                "strategy",
                "seed",
                "status",
                "steps",
                "scoring_seconds",
                "training_seconds",
                "total_seconds",
                "error",
            ]
        )
        for c in report.cells:
            if not c.ok:
                first_line = (c.error or "").strip().splitlines()[-1] if c.error else ""
                writer.writerow([c.strategy, c.seed, "failed", "", "", "", "", first_line])
                continue
            recs = c.result.all_records
            writer.writerow(
                [
                    c.strategy,
                    c.seed,
                    "ok",
                    len(c.result.steps),
                    _fmt(sum(r.timings.scoring_seconds for r in recs)),
                    _fmt(sum(r.timings.training_seconds for r in recs)),
                    _fmt(sum(r.timings.total_seconds for r in recs)),
                    "",
                ]
            )


def _write_hist_csv(path: Path, report: ComparisonReport) -> None:
    edges = np.linspace(0.0, 1.0, HIST_BINS + 1)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["strategy", "bin_lo", "bin_hi", "count"])
        for strategy in sorted(report.histograms):
            for i, count in enumerate(report.histograms[strategy]):
                writer.writerow(
                    [strategy, _fmt(float(edges[i])), _fmt(float(edges[i + 1])), int(count)]
                )


def _plot_metric(path: Path, report: ComparisonReport, metric: str) -> None:
    import matplotlib

    matplotlib.use("Agg", force=True)
    import matplotlib.pyplot as plt

    plt.rcParams["svg.hashsalt"] = "actisum"
    fig, ax = plt.subplots(figsize=(7, 4.5))
    data_lines = ["strategy,l,mean,std"]
    for strategy in sorted({p.strategy for p in report.curves}):
        points = [p for p in report.curves if p.strategy == strategy and p.metric == metric]
        xs = [p.labeled_size for p in points]
        means = np.array([p.mean for p in points])
        stds = np.array([p.std for p in points])
        ax.plot(xs, means, marker="o", markersize=3, label=strategy)
        ax.fill_between(xs, means - stds, means + stds, alpha=0.2)
        data_lines.extend(
            f"{strategy},{p.labeled_size},{_fmt(p.mean)},{_fmt(p.std)}" for p in points
        )
    ax.set_xlabel("labeled examples")
    ax.set_ylabel(f"{metric} F1 (mean over seeds, ±std)")
    ax.set_title(f"Learning curves: {metric}")
    if len(data_lines) > 1:
        ax.legend()
    ax.grid(True, alpha=0.3)
    buffer = io.StringIO()
    fig.savefig(buffer, format="svg", metadata={"Date": None})
    plt.close(fig)
    svg = buffer.getvalue()
    comment = "<!-- curve data\n" + "\n".join(data_lines) + "\n-->\n"
    head, sep, tail = svg.partition("<svg")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(head + comment + sep + tail)


def emit_report(report: ComparisonReport, out_dir: Path) -> list[Path]:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    files = [
        out_dir / "curves.csv",
        out_dir / "best.csv",
        out_dir / "timings.csv",
        out_dir / "uncertainty_hist.csv",
    ]
    _write_curves_csv(files[0], report)
    _write_best_csv(files[1], report)
    _write_timings_csv(files[2], report)
    _write_hist_csv(files[3], report)
    for metric in EVAL_METRICS:
        path = out_dir / f"curve_{metric}.svg"
        _plot_metric(path, report, metric)
        files.append(path)
    return files
