"""Pixel-level detection metrics and ROC sweeps for mask sequences.

Counts are pooled over all frames before any rate is formed, so frames with
no true foreground contribute to the totals without producing divide-by-zero
frames of their own. Rates with a zero denominator are reported as 0 and
flagged.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .background import (
    ForegroundMaskSequence,
    ResidualSequence,
    filter_masks,
    threshold_mask,
)

__all__ = [
    "ConfusionCounts",
    "RocPoint",
    "RocCurve",
    "confusion",
    "recall",
    "precision",
    "specificity",
    "f_measure",
    "f_measure_from_rates",
    "evaluate_masks",
    "metrics_row",
    "default_taus",
    "roc_curve",
    "best_f_over_thresholds",
    "write_roc_csv",
    "write_metrics_csv",
]


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int
    fp: int
    tn: int
    fn: int

    def __post_init__(self) -> None:
        if min(self.tp, self.fp, self.tn, self.fn) < 0:
            raise ValueError("confusion counts must be nonnegative")

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn

    def __add__(self, other: "ConfusionCounts") -> "ConfusionCounts":
        return ConfusionCounts(
            self.tp + other.tp,
            self.fp + other.fp,
            self.tn + other.tn,
            self.fn + other.fn,
        )


@dataclass(frozen=True)
class RocPoint:
    one_minus_specificity: float
    recall: float
    tau: float


@dataclass(frozen=True)
class RocCurve:
    """Operating points ordered by descending tau, (0,0) and (1,1) appended."""

    points: tuple[RocPoint, ...]
    auc: float

    def __post_init__(self) -> None:
        for p in self.points:
            if not (0.0 <= p.one_minus_specificity <= 1.0 and 0.0 <= p.recall <= 1.0):
                raise ValueError("ROC coordinates must lie in [0, 1]")
        taus = [p.tau for p in self.points]
        if any(a < b for a, b in zip(taus, taus[1:])):
            raise ValueError("ROC points must be ordered by descending tau")
        if not -1e-12 <= self.auc <= 1.0 + 1e-12:
            raise ValueError(f"auc {self.auc} outside [0, 1]")

    @property
    def fpr(self) -> np.ndarray:
        return np.array([p.one_minus_specificity for p in self.points])

    @property
    def tpr(self) -> np.ndarray:
        return np.array([p.recall for p in self.points])


def confusion(
    predicted: ForegroundMaskSequence, truth: ForegroundMaskSequence
) -> ConfusionCounts:
    """Pixel counts pooled over every frame of the two sequences."""
    if predicted.masks.shape != truth.masks.shape:
        raise ValueError(
            f"mask shapes differ: {predicted.masks.shape} vs {truth.masks.shape}"
        )
    p = predicted.masks
    t = truth.masks
    tp = int(np.count_nonzero(p & t))
    fp = int(np.count_nonzero(p & ~t))
    tn = int(np.count_nonzero(~p & ~t))
    fn = int(np.count_nonzero(~p & t))
    return ConfusionCounts(tp, fp, tn, fn)


def _rate(num: int, den: int) -> tuple[float, bool]:
    if den == 0:
        return 0.0, True
    return num / den, False


def recall(c: ConfusionCounts) -> float:
    return _rate(c.tp, c.tp + c.fn)[0]


def precision(c: ConfusionCounts) -> float:
    return _rate(c.tp, c.tp + c.fp)[0]


def specificity(c: ConfusionCounts) -> float:
    return _rate(c.tn, c.tn + c.fp)[0]


def f_measure_from_rates(r: float, p: float) -> float:
    """Harmonic mean of recall and precision; 0 when both vanish."""
    if r + p == 0.0:
        return 0.0
    return 2.0 * r * p / (r + p)


def f_measure(c: ConfusionCounts) -> float:
    return f_measure_from_rates(recall(c), precision(c))


def evaluate_masks(
    predicted: ForegroundMaskSequence, truth: ForegroundMaskSequence
) -> dict[str, float | bool]:
    """All four rates plus a flag recording any zero-denominator fallback."""
    c = confusion(predicted, truth)
    r, r_undef = _rate(c.tp, c.tp + c.fn)
    p, p_undef = _rate(c.tp, c.tp + c.fp)
    s, s_undef = _rate(c.tn, c.tn + c.fp)
    return {
        "recall": r,
        "precision": p,
        "specificity": s,
        "f_measure": f_measure_from_rates(r, p),
        "undefined_rates": r_undef or p_undef or s_undef,
    }


def metrics_row(tau: float, c: ConfusionCounts) -> dict[str, object]:
    """One CSV row: raw counts plus the derived rates at a threshold."""
    return {
        "tau": tau,
        "tp": c.tp,
        "fp": c.fp,
        "tn": c.tn,
        "fn": c.fn,
        "recall": recall(c),
        "precision": precision(c),
        "specificity": specificity(c),
        "f_measure": f_measure(c),
    }


def default_taus(S: ResidualSequence, n: int = 51) -> np.ndarray:
    """n thresholds evenly spaced over [0, max residual]."""
    if n < 2:
        raise ValueError(f"need at least 2 thresholds, got {n}")
    top = float(S.values.max())
    if top == 0.0:
        top = 1.0
    return np.linspace(0.0, top, n)


def _tau_sweep(S: ResidualSequence, taus: Iterable[float] | None) -> np.ndarray:
    if taus is None:
        return default_taus(S)
    arr = np.asarray(list(taus), dtype=np.float64)
    if np.any(arr < 0) or not np.all(np.isfinite(arr)):
        raise ValueError("thresholds must be finite and nonnegative")
    return arr


def roc_curve(
    S: ResidualSequence,
    truth: ForegroundMaskSequence,
    taus: Iterable[float] | None = None,
) -> RocCurve:
    """Sweep thresholds over the residual and trace (1 - specificity, recall).

    Points are ordered by descending tau, which makes both coordinates
    nondecreasing along the curve; (0, 0) and (1, 1) are appended as virtual
    endpoints for the infinite and zero-threshold extremes. The area comes
    from the trapezoidal rule.
    """
    if not truth.masks.any():
        raise ValueError("truth contains no foreground pixels")
    if truth.masks.all():
        raise ValueError("truth contains no background pixels")
    tau_arr = np.unique(_tau_sweep(S, taus))[::-1]
    if tau_arr.size < 2:
        raise ValueError(f"need at least 2 distinct thresholds, got {tau_arr.size}")
    points = [RocPoint(0.0, 0.0, np.inf)]
    for tau in tau_arr:
        c = confusion(threshold_mask(S, float(tau)), truth)
        points.append(RocPoint(1.0 - specificity(c), recall(c), float(tau)))
    points.append(RocPoint(1.0, 1.0, -np.inf))
    fpr = np.array([p.one_minus_specificity for p in points])
    tpr = np.array([p.recall for p in points])
    area = float(np.trapezoid(tpr, fpr))
    return RocCurve(tuple(points), area)


def best_f_over_thresholds(
    S: ResidualSequence,
    truth: ForegroundMaskSequence,
    taus: Iterable[float] | None = None,
    kernel: int = 1,
) -> tuple[float, float]:
    """(tau, F) maximizing F over a sweep, optionally median-filtered masks.

    Ties keep the smallest tau.
    """
    best_tau, best_f = 0.0, -1.0
    for tau in np.unique(_tau_sweep(S, taus)):
        masks = threshold_mask(S, float(tau))
        if kernel > 1:
            masks = filter_masks(masks, kernel)
        f = f_measure(confusion(masks, truth))
        if f > best_f:
            best_tau, best_f = float(tau), f
    return best_tau, best_f


def write_roc_csv(path: str, curve: RocCurve) -> None:
    """Point list in CSV columns (tau, 1-specificity, recall), AUC summary last."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["tau", "one_minus_specificity", "recall"])
        for p in curve.points:
            writer.writerow([repr(p.tau), repr(p.one_minus_specificity), repr(p.recall)])
        fh.write(f"# auc={curve.auc!r}\n")


def write_metrics_csv(path: str, rows: Sequence[dict[str, object]]) -> None:
    """One row per threshold; column order fixed for diffability."""
    cols = ["tau", "tp", "fp", "tn", "fn", "recall", "precision", "specificity", "f_measure"]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(cols)
        for row in rows:
            writer.writerow([repr(row[c]) if c in row else "" for c in cols])
