"""Zone partition of the unlabeled pool and query selection strategies.

The current scores split the pool into three zones: below -1 (F_minus),
inside the margin band [-1, +1] (F_zero, boundary inclusive) and above +1
(F_plus).  The adaptive strategy queries the top-scored sample while the
queried labels skew negative (balance statistic rho below its threshold,
or during burn-in) and the most uncertain sample otherwise.  Per-zone label
likelihoods are tracked as diagnostics; the decision itself uses only rho.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

STRATEGY_KINDS = ("mcle", "fplus_only", "fzero_only", "fminus_only", "random")


class ZoneTag(enum.Enum):
    F_MINUS = "F_minus"
    F_ZERO = "F_zero"
    F_PLUS = "F_plus"


def partition(scores: np.ndarray) -> list[ZoneTag]:
    """Zone tag per sample; scores of exactly +/-1 fall in F_zero."""
    scores = np.asarray(scores, dtype=np.float64)
    if not np.isfinite(scores).all():
        raise ValueError("scores must be finite")
    tags = []
    for s in scores:
        if s < -1.0:
            tags.append(ZoneTag.F_MINUS)
        elif s > 1.0:
            tags.append(ZoneTag.F_PLUS)
        else:
            tags.append(ZoneTag.F_ZERO)
    return tags


def zone_histogram(scores: np.ndarray) -> dict[str, int]:
    scores = np.asarray(scores, dtype=np.float64)
    return {
        ZoneTag.F_MINUS.value: int((scores < -1.0).sum()),
        ZoneTag.F_ZERO.value: int(((scores >= -1.0) & (scores <= 1.0)).sum()),
        ZoneTag.F_PLUS.value: int((scores > 1.0).sum()),
    }


@dataclass(frozen=True)
class StrategyConfig:
    kind: str = "mcle"
    rho_prime: float = 0.5
    burn_in: int = 10
    seed: int = 0

    def __post_init__(self):
        if self.kind not in STRATEGY_KINDS:
            raise ValueError(f"unknown strategy {self.kind!r}")
        if not 0.0 < self.rho_prime < 1.0:
            raise ValueError(f"rho_prime must be in (0, 1), got {self.rho_prime}")
        if self.burn_in < 0:
            raise ValueError("burn_in must be >= 0")


@dataclass(frozen=True)
class BalanceStat:
    """Fraction of positives among queried labels; 0 before any query."""

    n_pos: int = 0
    n_neg: int = 0

    @property
    def rho(self) -> float:
        total = self.n_pos + self.n_neg
        return self.n_pos / total if total else 0.0


def update_balance(balance: BalanceStat, label: int) -> BalanceStat:
    if label == 1:
        return BalanceStat(balance.n_pos + 1, balance.n_neg)
    if label == -1:
        return BalanceStat(balance.n_pos, balance.n_neg + 1)
    raise ValueError(f"label must be +1 or -1, got {label}")


# initial likelihood shares before any update: (pos|F+, neg|F+, pos|F0, neg|F0)
_TRACKER_INIT = (0.5, 0.2, 0.1, 0.2)
_CELLS = (("F_plus", 1), ("F_plus", -1), ("F_zero", 1), ("F_zero", -1))


@dataclass(frozen=True)
class LikelihoodTracker:
    """Per-(zone, label) sampling likelihoods, jointly normalized to 1."""

    p_pos_fplus: float = _TRACKER_INIT[0]
    p_neg_fplus: float = _TRACKER_INIT[1]
    p_pos_fzero: float = _TRACKER_INIT[2]
    p_neg_fzero: float = _TRACKER_INIT[3]
    c_pos_fplus: int = 0
    c_neg_fplus: int = 0
    c_pos_fzero: int = 0
    c_neg_fzero: int = 0
    t: int = 1

    def probs(self) -> tuple[float, float, float, float]:
        return (self.p_pos_fplus, self.p_neg_fplus, self.p_pos_fzero, self.p_neg_fzero)

    def counts(self) -> tuple[int, int, int, int]:
        return (self.c_pos_fplus, self.c_neg_fplus, self.c_pos_fzero, self.c_neg_fzero)

    def as_dict(self) -> dict[str, float]:
        return {
            "p_pos_fplus": self.p_pos_fplus,
            "p_neg_fplus": self.p_neg_fplus,
            "p_pos_fzero": self.p_pos_fzero,
            "p_neg_fzero": self.p_neg_fzero,
        }


def update_tracker(tracker: LikelihoodTracker, queried_zone: ZoneTag,
                   label: int) -> LikelihoodTracker:
    """Recurrence update for one queried label.

    F_minus queries are untracked and leave the tracker unchanged.  Each
    tracked cell becomes its previous share plus count/(t-1), then all four
    are renormalized to sum to one.
    """
    if label not in (1, -1):
        raise ValueError(f"label must be +1 or -1, got {label}")
    if queried_zone == ZoneTag.F_MINUS:
        return tracker
    counts = list(tracker.counts())
    cell = _CELLS.index((queried_zone.value, label))
    counts[cell] += 1
    t = tracker.t + 1
    raw = [p + c / (t - 1) for p, c in zip(tracker.probs(), counts)]
    total = sum(raw)
    probs = [v / total for v in raw]
    return LikelihoodTracker(*probs, *counts, t=t)


def select_query(strategy: StrategyConfig, scores: np.ndarray, unlabeled_ids,
                 balance: BalanceStat, t: int) -> tuple[int, ZoneTag]:
    """Pick the next sample id to query and the rule's target zone.

    Selection is by rank within the intended zone: argmax score for F_plus,
    argmin |score| for F_zero, argmin score for F_minus.  Ties resolve to
    the lowest sample index (ids must be in ascending order).
    """
    ids = np.asarray(unlabeled_ids)
    scores = np.asarray(scores, dtype=np.float64)
    if ids.size == 0:
        raise ValueError("unlabeled set is empty")
    if ids.shape != scores.shape:
        raise ValueError("scores must align with unlabeled_ids")

    kind = strategy.kind
    if kind == "mcle":
        kind = "fplus_only" if (t < strategy.burn_in or balance.rho < strategy.rho_prime) \
            else "fzero_only"

    if kind == "fplus_only":
        return int(ids[np.argmax(scores)]), ZoneTag.F_PLUS
    if kind == "fzero_only":
        return int(ids[np.argmin(np.abs(scores))]), ZoneTag.F_ZERO
    if kind == "fminus_only":
        return int(ids[np.argmin(scores)]), ZoneTag.F_MINUS
    # random: seeded per (seed, t) so the draw is reproducible
    rng = np.random.default_rng((strategy.seed, t))
    i = int(rng.integers(ids.size))
    s = scores[i]
    zone = ZoneTag.F_MINUS if s < -1.0 else ZoneTag.F_PLUS if s > 1.0 else ZoneTag.F_ZERO
    return int(ids[i]), zone
