"""Precision/recall/F1, per-iteration averaging, and logarithmic trendlines.

F1 is the harmonic mean 2pr/(p+r); zero-denominator precision or recall is
defined as 0. Two averaging modes are provided because the source experiments
never state theirs: 'macro' (per-class scores over classes with nonzero
support, averaged, F1 taken of the averaged p/r) and 'binary-relevant'
(Relevant as the positive class, everything else negative). Reports name the
mode used.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .labels import N_CLASSES

DEFAULT_TREND_A = 0.09
DEFAULT_TREND_B = 0.22

SCORE_MODES = ("macro", "binary-relevant")


@dataclass(frozen=True)
class ScoreTriple:
    precision: float
    recall: float
    f1: float


@dataclass(frozen=True)
class TrendlineFit:
    """Least-squares fit of y = a*ln(x) + b over (x, y) points."""

    a: float
    b: float

    def value_at(self, n: float) -> float:
        return self.a * math.log(n) + self.b

    def crossing_n(self, target: float) -> Optional[int]:
        """Smallest x (nearest integer) where the fit reaches target y.

        None when the fit is flat or the crossing is out of floating range.
        """
        if self.a == 0.0:
            return None
        z = (target - self.b) / self.a
        if z > 700.0:  # exp overflow guard
            return None
        return max(1, int(round(math.exp(z))))


def f1_of(precision: float, recall: float) -> float:
    if precision + recall <= 0.0:
        return 0.0
    return 2.0 * precision * recall / (precision + recall)


def confusion(truth: Sequence[int], predicted: Sequence[int]) -> np.ndarray:
    """3x3 count matrix, true class x predicted class."""
    if len(truth) != len(predicted):
        raise ValueError(f"length mismatch: {len(truth)} truth vs {len(predicted)} predicted")
    counts = np.zeros((N_CLASSES, N_CLASSES), dtype=np.int64)
    for t, p in zip(truth, predicted):
        counts[int(t), int(p)] += 1
    return counts


def score(counts: np.ndarray, mode: str = "macro") -> ScoreTriple:
    """Reduce a confusion matrix to a precision/recall/F1 triple."""
    if mode == "macro":
        supported = [c for c in range(N_CLASSES) if counts[c, :].sum() > 0]
        if not supported:
            return ScoreTriple(0.0, 0.0, 0.0)
        precisions = []
        recalls = []
        for c in supported:
            col = counts[:, c].sum()
            row = counts[c, :].sum()
            precisions.append(counts[c, c] / col if col > 0 else 0.0)
            recalls.append(counts[c, c] / row if row > 0 else 0.0)
        p = float(np.mean(precisions))
        r = float(np.mean(recalls))
        return ScoreTriple(p, r, f1_of(p, r))
    if mode == "binary-relevant":
        tp = float(counts[0, 0])
        fp = float(counts[1, 0] + counts[2, 0])
        fn = float(counts[0, 1] + counts[0, 2])
        p = tp / (tp + fp) if tp + fp > 0 else 0.0
        r = tp / (tp + fn) if tp + fn > 0 else 0.0
        return ScoreTriple(p, r, f1_of(p, r))
    raise ValueError(f"unknown score mode {mode!r}; expected one of {SCORE_MODES}")


def average_f1(per_iteration: Sequence[ScoreTriple]) -> ScoreTriple:
    """Arithmetic mean of p, r, f1 component-wise (f1 is NOT recomputed)."""
    if not per_iteration:
        raise ValueError("cannot average an empty score list")
    return ScoreTriple(
        float(np.mean([s.precision for s in per_iteration])),
        float(np.mean([s.recall for s in per_iteration])),
        float(np.mean([s.f1 for s in per_iteration])),
    )


def fit_log(points: Sequence[tuple[float, float]]) -> TrendlineFit:
    """Least squares of y on ln(x); needs >= 2 points with distinct x >= 1."""
    if len(points) < 2:
        raise ValueError(f"need at least 2 points to fit, got {len(points)}")
    ns = np.array([p[0] for p in points], dtype=np.float64)
    ys = np.array([p[1] for p in points], dtype=np.float64)
    if np.any(ns < 1):
        raise ValueError("all x values must be >= 1 for a logarithmic fit")
    lx = np.log(ns)
    var = np.mean(lx * lx) - np.mean(lx) ** 2
    if var == 0.0:
        raise ValueError("all x values are equal; the fit is singular")
    cov = np.mean(lx * ys) - np.mean(lx) * np.mean(ys)
    a = cov / var
    b = float(np.mean(ys) - a * np.mean(lx))
    return TrendlineFit(a=float(a), b=b)


def estimate_f1(
    n_trained: int,
    a: float = DEFAULT_TREND_A,
    b: float = DEFAULT_TREND_B,
) -> float:
    """Live performance proxy: clamp(a*ln(n) + b, 0, 1); 0 before any training.

    Defaults are the published wildfire-derived trendline coefficients; they
    are configuration so operators can refit for their own corpora.
    """
    if n_trained <= 0:
        return 0.0
    return min(max(a * math.log(n_trained) + b, 0.0), 1.0)
