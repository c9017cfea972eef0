"""Ranking metrics and learning-curve aggregation."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np


def average_precision(scores, relevance) -> float:
    """AP of ranking by descending score, ties broken by ascending index.

    relevance holds ±1; raises ValueError when there is no positive.
    """
    scores = np.asarray(scores, dtype=np.float64)
    relevance = np.asarray(relevance)
    if scores.shape != relevance.shape or scores.ndim != 1:
        raise ValueError("scores and relevance must be 1-d and aligned")
    n_pos = int((relevance == 1).sum())
    if n_pos == 0:
        raise ValueError("average precision is undefined without positives")
    order = np.lexsort((np.arange(scores.size), -scores))
    hits = (relevance[order] == 1).astype(np.float64)
    cum = np.cumsum(hits)
    ranks = np.arange(1, scores.size + 1)
    return float(np.sum(hits * cum / ranks) / n_pos)


@dataclass
class LearningCurve:
    class_name: str
    strategy: str
    iterations: list[int] = field(default_factory=list)
    ap_values: list[float] = field(default_factory=list)

    def __post_init__(self):
        if len(self.iterations) != len(self.ap_values):
            raise ValueError("iterations and ap_values must be aligned")

    def ap_at(self, t: int) -> float:
        """AP at the nearest logged iteration <= t."""
        best = None
        for it, ap in zip(self.iterations, self.ap_values):
            if it <= t:
                best = ap
            else:
                break
        if best is None:
            raise ValueError(f"no logged iteration <= {t}")
        return best

    @classmethod
    def from_run_result(cls, result: dict, class_name: str | None = None,
                        strategy: str | None = None):
        its, aps = [], []
        for entry in result["iterations"]:
            if entry["test_ap"] is not None:
                its.append(entry["t"])
                aps.append(entry["test_ap"])
        return cls(class_name=class_name or result["config"]["class"],
                   strategy=strategy or result["config"]["strategy"]["kind"],
                   iterations=its, ap_values=aps)


def mean_ap(curves, t: int) -> float:
    """Mean over classes of the per-class AP at iteration t."""
    curves = list(curves)
    if not curves:
        raise ValueError("mean_ap over an empty curve set")
    return float(np.mean([c.ap_at(t) for c in curves]))


def grid_points(max_t: int, step: int = 50) -> list[int]:
    return list(range(0, max_t + 1, step))


def export_curves_csv(path, curves, grid) -> None:
    """CSV with header t,<class...>,mean; one row per grid point."""
    curves = list(curves)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t"] + [c.class_name for c in curves] + ["mean"])
        for t in grid:
            aps = [c.ap_at(t) for c in curves]
            w.writerow([t] + [repr(a) for a in aps] + [repr(float(np.mean(aps)))])
