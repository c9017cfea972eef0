"""Active-learning session state machine.

One session owns one binary classifier for one target class, ties the
zero-shot prior, the incremental solver and the query sampler into the
iteration loop, and logs a per-iteration learning curve against the held-out
test split.  Labels come either from the bound ground-truth column
(simulated oracle) or from an external caller via propose/submit.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .data import Bundle
from .metrics import average_precision
from .prior import PriorSchedule, ZeroShotPrior, combined_score
from .sampler import (BalanceStat, LikelihoodTracker, StrategyConfig, ZoneTag,
                      partition, select_query, update_balance, update_tracker,
                      zone_histogram)
from .svm import LinearModel, SolverConfig, train_incremental

STATUS_AWAITING_QUERY = "awaiting_query"
STATUS_AWAITING_LABEL = "awaiting_label"
STATUS_FINISHED = "finished"


class SessionFinished(RuntimeError):
    pass


class QueryMismatch(ValueError):
    """Submitted label does not answer the pending query."""


@dataclass
class PendingQuery:
    sample_id: int
    intended_zone: ZoneTag
    actual_zone: ZoneTag
    score: float
    label: Optional[int] = None


@dataclass
class QueryRecord:
    t: int
    sample_id: int
    intended_zone: str
    actual_zone: str
    score: float
    label: int
    rho_after: float
    tracker_after: dict


@dataclass
class Session:
    id: str
    class_name: str
    bundle: Bundle
    strategy: StrategyConfig
    schedule: PriorSchedule
    solver_config: SolverConfig
    oracle_kind: str
    B: int
    max_iters: int
    model: LinearModel
    prior: ZeroShotPrior
    balance: BalanceStat = field(default_factory=BalanceStat)
    tracker: LikelihoodTracker = field(default_factory=LikelihoodTracker)
    labels: dict = field(default_factory=dict)     # queried global id -> ±1
    t: int = 0
    status: str = STATUS_AWAITING_QUERY
    curve: list = field(default_factory=list)       # (t, test_ap or None)
    query_log: list = field(default_factory=list)   # QueryRecord
    pending: Optional[list] = None

    @property
    def has_truth(self) -> bool:
        return self.class_name in self.bundle.labels.class_names

    def truth_column(self) -> np.ndarray:
        return self.bundle.labels.column(self.class_name)

    def unlabeled_train_ids(self) -> np.ndarray:
        train = self.bundle.pool.train_indices
        if not self.labels:
            return train
        mask = ~np.isin(train, list(self.labels))
        return train[mask]

    def n_selected(self) -> int:
        return len(self.labels)


def create_session(bundle: Bundle, class_name: str,
                   strategy: StrategyConfig | None = None,
                   schedule: PriorSchedule | None = None,
                   solver_config: SolverConfig | None = None,
                   oracle_kind: str = "simulated", B: int = 1,
                   max_iters: int = 300, seed: int | None = None,
                   session_id: str = "session-0") -> Session:
    strategy = strategy or StrategyConfig()
    if seed is not None:
        strategy = replace(strategy, seed=seed)
    schedule = schedule or PriorSchedule()
    solver_config = solver_config or SolverConfig()
    if oracle_kind not in ("simulated", "external"):
        raise ValueError(f"oracle_kind must be 'simulated' or 'external', got {oracle_kind!r}")
    if B < 1:
        raise ValueError("budget B must be >= 1")
    if max_iters < 0:
        raise ValueError("max_iters must be >= 0")
    if class_name not in bundle.relations.target_names:
        raise ValueError(f"unknown class {class_name!r}")
    if oracle_kind == "simulated" and class_name not in bundle.labels.class_names:
        raise ValueError(f"class {class_name!r} has no ground-truth column for a simulated oracle")
    pool = bundle.pool
    if pool.train_indices.size == 0:
        raise ValueError("train split is empty")

    prior = ZeroShotPrior.build(bundle.sources, bundle.relations, class_name)
    model = LinearModel.untrained(pool.dim, pool.train_indices.size, solver_config)
    session = Session(id=session_id, class_name=class_name, bundle=bundle,
                      strategy=strategy, schedule=schedule,
                      solver_config=solver_config, oracle_kind=oracle_kind,
                      B=B, max_iters=max_iters, model=model, prior=prior)
    session.curve.append((0, _evaluate(session)))
    if max_iters == 0 or pool.train_indices.size == 0:
        session.status = STATUS_FINISHED
    return session


def _evaluate(session: Session) -> Optional[float]:
    if not session.has_truth:
        return None
    test = session.bundle.pool.test_indices
    truth = session.truth_column()[test]
    if not (truth == 1).any():
        return None
    scores = combined_score(session.prior, session.schedule, session.model,
                            session.bundle.pool.features[test], session.t)
    return average_precision(scores, truth)


def current_scores(session: Session):
    """(unlabeled train ids, combined scores at the session's current t)."""
    ids = session.unlabeled_train_ids()
    scores = combined_score(session.prior, session.schedule, session.model,
                            session.bundle.pool.features[ids], session.t)
    return ids, np.atleast_1d(scores)


def unlabeled_zone_histogram(session: Session) -> dict[str, int]:
    _, scores = current_scores(session)
    return zone_histogram(scores)


def propose_queries(session: Session) -> list[PendingQuery]:
    """Pick this iteration's queries without labels (external-oracle path).

    Idempotent: re-proposing returns the already-pending queries.
    """
    if session.status == STATUS_FINISHED:
        raise SessionFinished(f"session {session.id} is finished")
    if session.pending is not None:
        return session.pending
    ids, scores = current_scores(session)
    zones = partition(scores)
    pending = []
    remaining = np.ones(ids.size, dtype=bool)
    for _ in range(min(session.B, ids.size)):
        idx = np.flatnonzero(remaining)
        sid, intended = select_query(session.strategy, scores[idx], ids[idx],
                                     session.balance, session.t)
        pos = int(np.flatnonzero(ids == sid)[0])
        remaining[pos] = False
        pending.append(PendingQuery(sample_id=sid, intended_zone=intended,
                                    actual_zone=zones[pos], score=float(scores[pos])))
    session.pending = pending
    session.status = STATUS_AWAITING_LABEL
    return pending


def submit_label(session: Session, sample_id: int, label: int) -> None:
    """Answer the next pending query; finalizes the iteration once all of
    this iteration's queries are answered."""
    if session.status == STATUS_FINISHED:
        raise SessionFinished(f"session {session.id} is finished")
    if session.pending is None:
        raise QueryMismatch("no pending query; call propose_queries first")
    if label not in (1, -1):
        raise ValueError(f"label must be +1 or -1, got {label}")
    nxt = next((p for p in session.pending if p.label is None), None)
    if nxt is None or nxt.sample_id != int(sample_id):
        raise QueryMismatch(
            f"expected a label for sample {nxt.sample_id if nxt else None}, got {sample_id}")
    nxt.label = int(label)
    if all(p.label is not None for p in session.pending):
        _finalize_iteration(session, session.pending)


def step(session: Session) -> list[QueryRecord]:
    """One simulated-oracle iteration: query B samples, label from ground
    truth (balance/tracker updated between picks), retrain, evaluate."""
    if session.oracle_kind != "simulated":
        raise ValueError("step() drives the simulated oracle; use propose/submit for external")
    if session.status == STATUS_FINISHED:
        raise SessionFinished(f"session {session.id} is finished")
    truth = session.truth_column()
    ids, scores = current_scores(session)
    zones = partition(scores)
    balance = session.balance
    tracker = session.tracker
    picked = []
    remaining = np.ones(ids.size, dtype=bool)
    for _ in range(min(session.B, ids.size)):
        idx = np.flatnonzero(remaining)
        sid, intended = select_query(session.strategy, scores[idx], ids[idx],
                                     balance, session.t)
        pos = int(np.flatnonzero(ids == sid)[0])
        remaining[pos] = False
        label = int(truth[sid])
        balance = update_balance(balance, label)
        tracker = update_tracker(tracker, zones[pos], label)
        picked.append(PendingQuery(sample_id=sid, intended_zone=intended,
                                   actual_zone=zones[pos],
                                   score=float(scores[pos]), label=label))
    return _finalize_iteration(session, picked, balance=balance, tracker=tracker)


def _finalize_iteration(session: Session, picked: list[PendingQuery],
                        balance: BalanceStat | None = None,
                        tracker: LikelihoodTracker | None = None):
    if balance is None or tracker is None:
        balance, tracker = session.balance, session.tracker
        for p in picked:
            balance = update_balance(balance, p.label)
            tracker = update_tracker(tracker, p.actual_zone, p.label)
    new_ids = [p.sample_id for p in picked]
    for p in picked:
        session.labels[p.sample_id] = p.label
    session.model = train_incremental(session.model, session.bundle.pool,
                                      session.labels, new_ids,
                                      session.solver_config,
                                      train_gram=session.bundle.pool.train_gram())
    session.balance = balance
    session.tracker = tracker
    session.t += 1
    records = [QueryRecord(t=session.t, sample_id=p.sample_id,
                           intended_zone=p.intended_zone.value,
                           actual_zone=p.actual_zone.value, score=p.score,
                           label=p.label, rho_after=session.balance.rho,
                           tracker_after=session.tracker.as_dict())
               for p in picked]
    session.query_log.extend(records)
    session.curve.append((session.t, _evaluate(session)))
    session.pending = None
    exhausted = session.unlabeled_train_ids().size == 0
    session.status = STATUS_FINISHED if (session.t >= session.max_iters or exhausted) \
        else STATUS_AWAITING_QUERY
    return records


def run_to_completion(session: Session) -> dict:
    """Drive a simulated-oracle session to its end; returns the RunResult."""
    if session.oracle_kind != "simulated":
        raise ValueError("run_to_completion requires a simulated oracle")
    while session.status != STATUS_FINISHED:
        step(session)
    return run_result(session)


def _config_echo(session: Session) -> dict:
    return {
        "class": session.class_name,
        "strategy": {
            "kind": session.strategy.kind,
            "rho_prime": session.strategy.rho_prime,
            "burn_in": session.strategy.burn_in,
            "seed": session.strategy.seed,
        },
        "schedule": {
            "kind": session.schedule.kind,
            "t0": session.schedule.t0,
            "drop_after": session.schedule.drop_after,
        },
        "solver": {
            "C": session.solver_config.C,
            "kkt_tol": session.solver_config.kkt_tol,
            "max_passes": session.solver_config.max_passes,
            "eq_tol": session.solver_config.eq_tol,
            "bias_mode": session.solver_config.bias_mode,
        },
        "oracle": session.oracle_kind,
        "budget": session.B,
        "max_iters": session.max_iters,
    }


def run_result(session: Session, final_model_path: str | None = None) -> dict:
    """RunResult with deterministic field order (diffable JSON)."""
    by_t: dict[int, list[QueryRecord]] = {}
    for rec in session.query_log:
        by_t.setdefault(rec.t, []).append(rec)
    iterations = []
    for t, ap in session.curve:
        entry = {"t": t, "queried": [], "rho": None, "tracker": None,
                 "test_ap": ap}
        recs = by_t.get(t, [])
        if recs:
            entry["queried"] = [{
                "id": r.sample_id,
                "zone_intended": r.intended_zone,
                "zone_actual": r.actual_zone,
                "score": r.score,
                "label": r.label,
            } for r in recs]
            entry["rho"] = recs[-1].rho_after
            entry["tracker"] = recs[-1].tracker_after
        iterations.append(entry)
    return {
        "config": _config_echo(session),
        "iterations": iterations,
        "final_model_path": final_model_path,
    }


def run_result_json(result: dict) -> str:
    return json.dumps(result, indent=2, sort_keys=False, allow_nan=False)
