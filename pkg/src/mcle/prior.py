"""Zero-shot scoring and prior-mixing schedules.

A target class with no labels yet is scored by a beta-weighted combination
of source classifiers.  During active learning the prior score is mixed
with the model score; four schedules control the mixing over iterations,
and the prior is dropped entirely after `drop_after` queries.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import RelationMatrix, SourceBank
from .svm import LinearModel, decision_value

SCHEDULE_KINDS = ("vanilla", "constant", "inverse_decay", "linear_decay")


@dataclass(frozen=True)
class ZeroShotPrior:
    """Immutable linear zero-shot scorer for one target class."""

    target_name: str
    beta_row: np.ndarray
    w_zs: np.ndarray
    b_zs: float

    @classmethod
    def build(cls, bank: SourceBank, relations: RelationMatrix, target_name: str):
        if target_name not in relations.target_names:
            raise ValueError(f"unknown target class {target_name!r}")
        beta = relations.row(target_name)
        return cls(target_name=target_name, beta_row=beta,
                   w_zs=beta @ bank.weights, b_zs=float(beta @ bank.biases))


@dataclass(frozen=True)
class PriorSchedule:
    kind: str = "constant"
    t0: int = 20
    drop_after: int = 150

    def __post_init__(self):
        if self.kind not in SCHEDULE_KINDS:
            raise ValueError(f"unknown schedule kind {self.kind!r}")
        if self.t0 < 1:
            raise ValueError("t0 must be >= 1")
        if self.drop_after < 0:
            raise ValueError("drop_after must be >= 0")


def zs_score(prior: ZeroShotPrior, x: np.ndarray):
    """Zero-shot score for a vector or a (n, dim) matrix."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape[-1] != prior.w_zs.shape[0]:
        raise ValueError(f"dimension mismatch: x has {x.shape[-1]}, prior has {prior.w_zs.shape[0]}")
    out = x @ prior.w_zs + prior.b_zs
    return float(out) if out.ndim == 0 else out


def mix_weights(schedule: PriorSchedule, t: int) -> tuple[float, float]:
    """(eta_prior, eta_model) at iteration t."""
    if t < 0:
        raise ValueError("t must be >= 0")
    if schedule.kind == "vanilla":
        weights = (1.0 if t == 0 else 0.0, 1.0)
    elif schedule.kind == "constant":
        weights = (1.0, 1.0)
    elif schedule.kind == "inverse_decay":
        weights = (1.0 / (t + 1), 1.0)
    else:  # linear_decay
        weights = (schedule.t0 / (t + schedule.t0), t / (t + schedule.t0))
    if schedule.drop_after > 0 and t >= schedule.drop_after:
        weights = (0.0, weights[1])
    return weights


def combined_score(prior: ZeroShotPrior, schedule: PriorSchedule,
                   model: LinearModel, x: np.ndarray, t: int):
    """eta_prior * zero-shot score + eta_model * model score."""
    eta_prior, eta_model = mix_weights(schedule, t)
    return eta_prior * zs_score(prior, x) + eta_model * decision_value(model, x)
