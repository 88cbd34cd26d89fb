"""Analytic cost of an acquisition run and calibration of its constants.

Per-step scoring cost is k·n·(c_sum + (n−1)·c_bl): k candidates, n summaries
each, and n(n−1) directed pairwise comparisons per candidate folded into a
per-summary rate. A full run costs (b/s) such steps plus one training phase
each, plus the warm-start training. Calibration fits the per-step constants
to observed timings by non-negative least squares with an additive intercept
absorbing fixed per-step overhead; the model is an approximation, so
residuals are reported instead of being forced to zero.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
from scipy.optimize import nnls

from actisum.errors import CalibrationError


@dataclass(frozen=True)
class CostConstants:
    c_sum: float
    c_bl: float
    c_train: float
    c_train0: float = 0.0

    def __post_init__(self) -> None:
        for name in ("c_sum", "c_bl", "c_train", "c_train0"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0, got {getattr(self, name)}")


def scoring_cost(k: int, n: int, constants: CostConstants) -> float:
    """Seconds to score one candidate batch: k·n·(c_sum + (n−1)·c_bl)."""
    if k < 0 or n < 0:
        raise ValueError(f"k and n must be >= 0, got k={k}, n={n}")
    return k * n * (constants.c_sum + (n - 1) * constants.c_bl)


def total_cost(k: int, n: int, s: int, b: int, constants: CostConstants) -> float:
    """Seconds for a whole run: (b/s)·(scoring + training) per step plus the
    warm-start training. b/s is a real ratio, not a rounded step count."""
    if s < 1:
        raise ValueError(f"s must be >= 1, got {s}")
    if b < 0:
        raise ValueError(f"b must be >= 0, got {b}")
    return (b / s) * (scoring_cost(k, n, constants) + constants.c_train) + constants.c_train0


Observation = tuple[float, float, float, float]
"""One per-step timing observation: (k, n, scoring_seconds, training_seconds)."""


@dataclass(frozen=True)
class CalibrationResult:
    constants: CostConstants
    intercept: float
    residuals: tuple[float, ...]

    @property
    def rms_residual(self) -> float:
        if not self.residuals:
            return 0.0
        return float(np.sqrt(np.mean(np.square(self.residuals))))

    def predicted_scoring(self, k: int, n: int) -> float:
        return self.intercept + scoring_cost(k, n, self.constants)


def calibrate(observations: Iterable[Observation], c_train0: float = 0.0) -> CalibrationResult:
    """Fit c_sum and c_bl to observed scoring times and take c_train as the
    mean observed training time.

    The design is scoring ≈ intercept + c_sum·kn + c_bl·kn(n−1) with all
    coefficients constrained non-negative. Needs at least two observations
    with distinct k; when every observation shares one n the two slope
    columns are proportional and only their combination is identified, which
    is fine for prediction at that n.
    """
    obs = list(observations)
    if len(obs) < 2:
        raise CalibrationError(f"need at least 2 observations, got {len(obs)}")
    ks = {o[0] for o in obs}
    if len(ks) < 2:
        raise CalibrationError(f"degenerate design: every observation has k={obs[0][0]}")

    rows = np.array([[1.0, o[0] * o[1], o[0] * o[1] * (o[1] - 1)] for o in obs])
    scoring = np.array([o[2] for o in obs], dtype=float)
    coef, _ = nnls(rows, scoring)
    residuals = scoring - rows @ coef

    c_train = float(np.mean([o[3] for o in obs]))
    constants = CostConstants(
        c_sum=float(coef[1]), c_bl=float(coef[2]), c_train=c_train, c_train0=c_train0
    )
    return CalibrationResult(
        constants=constants, intercept=float(coef[0]), residuals=tuple(float(r) for r in residuals)
    )


def read_timings(path: Path | str) -> tuple[list[Observation], float]:
    """Parse a per-step timings file into calibration observations.

    Rows with k > 0 become observations; the warm-start row (step 0) only
    contributes its training time, returned as c_train0.
    """
    observations: list[Observation] = []
    c_train0 = 0.0
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        required = {"step", "k", "n", "scoring_seconds", "training_seconds"}
        missing = required - set(reader.fieldnames or [])
        if missing:
            raise CalibrationError(f"timings file lacks columns {sorted(missing)}")
        for row in reader:
            k = float(row["k"])
            if int(row["step"]) == 0:
                c_train0 = float(row["training_seconds"])
            elif k > 0:
                observations.append(
                    (k, float(row["n"]), float(row["scoring_seconds"]), float(row["training_seconds"]))
                )
    return observations, c_train0


def calibrate_from_timings(*paths: Path | str) -> CalibrationResult:
    """Pool observations from one or more timings files and fit.

    A single run scores the same k every step, which the fit rejects as
    degenerate, so calibration normally pools several runs at different k;
    c_train0 is the mean warm-start training time across the files.
    """
    if not paths:
        raise CalibrationError("need at least one timings file")
    observations: list[Observation] = []
    warm_starts: list[float] = []
    for path in paths:
        obs, c_train0 = read_timings(path)
        observations.extend(obs)
        warm_starts.append(c_train0)
    return calibrate(observations, c_train0=float(np.mean(warm_starts)))


def format_calibration(result: CalibrationResult) -> str:
    lines = [
        f"c_sum = {result.constants.c_sum:.9g}",
        f"c_bl = {result.constants.c_bl:.9g}",
        f"c_train = {result.constants.c_train:.9g}",
        f"c_train0 = {result.constants.c_train0:.9g}",
        f"intercept = {result.intercept:.9g}",
        f"rms_residual = {result.rms_residual:.9g}",
        "residuals = " + " ".join(f"{r:.6g}" for r in result.residuals),
    ]
    return "\n".join(lines)


def load_constants(path: Path | str) -> CostConstants:
    """Read constants from a key/value file in format_calibration's layout."""
    values = {}
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line or "=" not in line:
                continue
            key, _, raw = line.partition("=")
            key = key.strip()
            if key in ("c_sum", "c_bl", "c_train", "c_train0"):
                values[key] = float(raw.strip())
    missing = {"c_sum", "c_bl", "c_train"} - set(values)
    if missing:
        raise CalibrationError(f"constants file lacks {sorted(missing)}")
    return CostConstants(**values)
