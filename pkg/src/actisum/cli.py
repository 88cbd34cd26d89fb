"""Command-line surface.

Subcommands: `run` (one acquisition run), `score` (metric scoring of
candidate/reference files), `calibrate` (fit cost constants from observed
timings), `cost` (predict run cost from constants), `experiment` (strategy ×
seed matrix with reports), and `learner-serve` (expose the built-in learner
over the wire protocol; `--learner-cmd self` uses this to exercise the
transport end-to-end).
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path
from typing import Optional, Sequence

from actisum import costmodel, engine, experiment
from actisum.errors import ActisumError
from actisum.corpus import load_corpus
from actisum.metrics import bleu, rouge_l, rouge_n, tokenize
from actisum.protocol import serve
from actisum.toy import ToyLearner


def _add_run(sub: argparse._SubParsersAction) -> None:
    p = sub.add_parser("run", help="execute one acquisition run")
    p.add_argument("--corpus", required=True, type=Path)
    p.add_argument("--config", required=True, type=Path)
    p.add_argument("--out", required=True, type=Path)
    p.add_argument("--learner-cmd", default=None, help='external learner command, or "self"')
    p.add_argument("--seed", type=int, default=None, help="override the config seed")


def _cmd_run(args: argparse.Namespace) -> int:
    with open(args.config, encoding="utf-8") as fh:
        flat = json.load(fh)
    if args.learner_cmd is not None:
        flat["learner_cmd"] = args.learner_cmd
    if args.seed is not None:
        flat["seed"] = args.seed
    config = engine.config_from_flat(flat)
    corpus = load_corpus(args.corpus)
    result = engine.run(config, corpus)
    engine.write_run_outputs(args.out, result)
    final = result.steps[-1].labeled_size_after if result.steps else result.warm_start.labeled_size_after
    print(f"completed {len(result.steps)} learning steps, labeled {final} of budget {config.budget}")
    print(f"outputs in {args.out}")
    return 0


def _add_score(sub: argparse._SubParsersAction) -> None:
    p = sub.add_parser("score", help="score candidate summaries against references")
    p.add_argument("--candidates", required=True, type=Path)
    p.add_argument("--references", required=True, type=Path)
    p.add_argument("--metric", required=True, choices=["bleu", "rouge1", "rouge2", "rougeL"])


def _read_scored_file(path: Path) -> list[tuple[str, str]]:
    """(id, text) pairs from either a line-delimited JSON file with `id` and
    `text` fields, or a plain text file (one entry per line, line number as
    id)."""
    entries: list[tuple[str, str]] = []
    with open(path, encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    for lineno, line in enumerate(lines, start=1):
        if line.strip().startswith("{"):
            try:
                obj = json.loads(line)
            except json.JSONDecodeError:
                obj = None
            if isinstance(obj, dict) and isinstance(obj.get("text"), str):
                entries.append((str(obj.get("id", lineno)), obj["text"]))
                continue
        entries.append((str(lineno), line))
    return entries


def _cmd_score(args: argparse.Namespace) -> int:
    candidates = _read_scored_file(args.candidates)
    references = dict(_read_scored_file(args.references))
    writer = csv.writer(sys.stdout, lineterminator="\n")
    if args.metric == "bleu":
        writer.writerow(["id", "bleu"])
    else:
        writer.writerow(["id", "precision", "recall", "f1"])
    for entry_id, text in candidates:
        if entry_id not in references:
            print(f"no reference with id {entry_id!r}", file=sys.stderr)
            return 2
        cand = tokenize(text)
        ref = tokenize(references[entry_id])
        if args.metric == "bleu":
            writer.writerow([entry_id, f"{bleu(cand, ref):.12g}"])
        else:
            if args.metric == "rougeL":
                score = rouge_l(cand, ref)
            else:
                score = rouge_n(cand, ref, int(args.metric[-1]))
            writer.writerow(
                [entry_id, f"{score.precision:.12g}", f"{score.recall:.12g}", f"{score.f1:.12g}"]
            )
    return 0


def _add_calibrate(sub: argparse._SubParsersAction) -> None:
    p = sub.add_parser("calibrate", help="fit cost constants from observed step timings")
    p.add_argument(
        "--trajectory",
        required=True,
        type=Path,
        nargs="+",
        help="run trajectory.csv files (timings are read from sibling timings.csv) "
        "or timings.csv files directly; pass several runs at different k, since "
        "a single run repeats one k and underdetermines the fit",
    )


def _timings_path(path: Path) -> Path:
    with open(path, encoding="utf-8") as fh:
        header = fh.readline()
    if "scoring_seconds" in header:
        return path
    sibling = path.parent / "timings.csv"
    if sibling.exists():
        return sibling
    raise ActisumError(
        f"{path} carries no timing columns and no sibling timings.csv was found"
    )


def _cmd_calibrate(args: argparse.Namespace) -> int:
    paths = [_timings_path(p) for p in args.trajectory]
    result = costmodel.calibrate_from_timings(*paths)
    print(costmodel.format_calibration(result))
    return 0


def _add_cost(sub: argparse._SubParsersAction) -> None:
    p = sub.add_parser("cost", help="predict total run cost from constants")
    p.add_argument("--k", required=True, type=int)
    p.add_argument("--n", required=True, type=int)
    p.add_argument("--s", required=True, type=int)
    p.add_argument("--b", required=True, type=int)
    p.add_argument("--constants", required=True, type=Path)


def _cmd_cost(args: argparse.Namespace) -> int:
    constants = costmodel.load_constants(args.constants)
    per_step = costmodel.scoring_cost(args.k, args.n, constants)
    total = costmodel.total_cost(args.k, args.n, args.s, args.b, constants)
    print(f"scoring_cost_per_step = {per_step:.9g}")
    print(f"total_cost = {total:.9g}")
    return 0


def _add_experiment(sub: argparse._SubParsersAction) -> None:
    p = sub.add_parser("experiment", help="run a strategy x seed matrix and emit reports")
    p.add_argument("--matrix", required=True, type=Path)
    p.add_argument("--out", required=True, type=Path)
    p.add_argument("--workers", type=int, default=1)


def _cmd_experiment(args: argparse.Namespace) -> int:
    matrix = experiment.load_matrix(args.matrix)
    report = experiment.run_matrix(matrix, workers=args.workers, out_dir=args.out)
    files = experiment.emit_report(report, args.out)
    for f in files:
        print(f"wrote {f}")
    if report.incomplete:
        failed = [(c.strategy, c.seed) for c in report.cells if not c.ok]
        print(f"WARNING: {len(failed)} cell(s) failed: {failed}", file=sys.stderr)
        return 1
    return 0


def _add_learner_serve(sub: argparse._SubParsersAction) -> None:
    sub.add_parser("learner-serve", help="serve the built-in learner over stdio")


def _cmd_learner_serve(_args: argparse.Namespace) -> int:
    serve(ToyLearner())
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="actisum",
        description="Active summarization: uncertainty-driven annotation under a labeling budget.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    _add_run(sub)
    _add_score(sub)
    _add_calibrate(sub)
    _add_cost(sub)
    _add_experiment(sub)
    _add_learner_serve(sub)
    return parser


_HANDLERS = {
    "run": _cmd_run,
    "score": _cmd_score,
    "calibrate": _cmd_calibrate,
    "cost": _cmd_cost,
    "experiment": _cmd_experiment,
    "learner-serve": _cmd_learner_serve,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _HANDLERS[args.command](args)
    except ActisumError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
