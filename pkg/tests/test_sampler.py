import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from mcle.sampler import (BalanceStat, LikelihoodTracker, StrategyConfig,
                          ZoneTag, partition, select_query, update_balance,
                          update_tracker, zone_histogram)


# ---------------------------------------------------------------------------
# Zones
# ---------------------------------------------------------------------------

def test_partition_thresholds():
    assert partition([-2.0, 0.0, 2.0]) == [ZoneTag.F_MINUS, ZoneTag.F_ZERO,
                                           ZoneTag.F_PLUS]


def test_partition_boundary_closed():
    assert partition([1.0, -1.0]) == [ZoneTag.F_ZERO, ZoneTag.F_ZERO]


def test_partition_all_zero():
    assert partition(np.zeros(5)) == [ZoneTag.F_ZERO] * 5


def test_partition_nonfinite():
    with pytest.raises(ValueError, match="finite"):
        partition([0.0, np.nan])


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(min_value=-50, max_value=50), min_size=1, max_size=40))
def test_partition_total_and_exclusive(scores):
    tags = partition(scores)
    hist = zone_histogram(scores)
    assert len(tags) == len(scores)
    assert sum(hist.values()) == len(scores)
    for s, tag in zip(scores, tags):
        expected = (ZoneTag.F_MINUS if s < -1 else
                    ZoneTag.F_PLUS if s > 1 else ZoneTag.F_ZERO)
        assert tag == expected


# ---------------------------------------------------------------------------
# Balance
# ---------------------------------------------------------------------------

def test_balance_initial_rho_zero():
    assert BalanceStat().rho == 0.0
    assert update_balance(BalanceStat(), -1).rho == 0.0


def test_balance_arithmetic():
    b = BalanceStat(n_pos=2, n_neg=2)
    assert update_balance(b, 1).rho == pytest.approx(3 / 5)


def test_balance_alternating():
    b = BalanceStat()
    for i in range(100):
        b = update_balance(b, 1 if i % 2 == 0 else -1)
    assert b.rho == 0.5


def test_balance_bad_label():
    with pytest.raises(ValueError):
        update_balance(BalanceStat(), 0)


# ---------------------------------------------------------------------------
# Likelihood tracker
# ---------------------------------------------------------------------------

def test_tracker_init():
    t = LikelihoodTracker()
    assert t.probs() == (0.5, 0.2, 0.1, 0.2)
    assert sum(t.probs()) == pytest.approx(1.0)
    assert t.counts() == (0, 0, 0, 0)
    assert t.t == 1


def test_tracker_first_update_increases_matching_cell():
    t0 = LikelihoodTracker()
    t1 = update_tracker(t0, ZoneTag.F_PLUS, 1)
    assert t1.p_pos_fplus > t0.p_pos_fplus
    assert t1.c_pos_fplus == 1


def test_tracker_hand_trace():
    """Frozen hand-executed trace of the recurrence for three queries."""
    t = LikelihoodTracker()
    t = update_tracker(t, ZoneTag.F_PLUS, 1)
    # raw = (0.5+1/1, 0.2, 0.1, 0.2) = (1.5, .2, .1, .2), sum 2.0
    assert t.probs() == pytest.approx((0.75, 0.10, 0.05, 0.10), abs=1e-12)
    t = update_tracker(t, ZoneTag.F_PLUS, -1)
    # raw = (0.75+1/2, 0.10+1/2, 0.05, 0.10) = (1.25, .6, .05, .1), sum 2.0
    assert t.probs() == pytest.approx((0.625, 0.30, 0.025, 0.05), abs=1e-12)
    t = update_tracker(t, ZoneTag.F_ZERO, -1)
    # raw = (0.625+1/3, 0.30+1/3, 0.025, 0.05+1/3), sum 2.0
    assert t.probs() == pytest.approx(
        ((0.625 + 1 / 3) / 2, (0.30 + 1 / 3) / 2, 0.0125, (0.05 + 1 / 3) / 2),
        abs=1e-12)
    assert t.counts() == (1, 1, 0, 1)
    assert t.t == 4


def test_tracker_fminus_untracked():
    t0 = LikelihoodTracker()
    assert update_tracker(t0, ZoneTag.F_MINUS, 1) is t0


def test_tracker_bad_label():
    with pytest.raises(ValueError):
        update_tracker(LikelihoodTracker(), ZoneTag.F_PLUS, 2)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.tuples(st.sampled_from([ZoneTag.F_PLUS, ZoneTag.F_ZERO,
                                           ZoneTag.F_MINUS]),
                          st.sampled_from([1, -1])), max_size=60))
def test_tracker_normalized_after_every_update(seq):
    t = LikelihoodTracker()
    for zone, label in seq:
        t = update_tracker(t, zone, label)
        assert sum(t.probs()) == pytest.approx(1.0, abs=1e-12)
        assert all(0.0 <= p <= 1.0 for p in t.probs())


# ---------------------------------------------------------------------------
# Query selection
# ---------------------------------------------------------------------------

SCORES = np.array([0.2, 1.7, -0.4])
IDS = np.array([10, 11, 12])


def test_mcle_burn_in_queries_fplus():
    cfg = StrategyConfig(kind="mcle", burn_in=10)
    sid, zone = select_query(cfg, SCORES, IDS, BalanceStat(n_pos=8, n_neg=2), t=3)
    assert (sid, zone) == (11, ZoneTag.F_PLUS)


def test_mcle_balanced_queries_fzero():
    cfg = StrategyConfig(kind="mcle")
    sid, zone = select_query(cfg, SCORES, IDS, BalanceStat(n_pos=8, n_neg=2), t=50)
    assert (sid, zone) == (10, ZoneTag.F_ZERO)


def test_mcle_imbalanced_queries_fplus():
    cfg = StrategyConfig(kind="mcle")
    sid, zone = select_query(cfg, SCORES, IDS, BalanceStat(n_pos=1, n_neg=9), t=50)
    assert (sid, zone) == (11, ZoneTag.F_PLUS)


def test_baseline_strategies():
    bal = BalanceStat()
    assert select_query(StrategyConfig(kind="fplus_only"), SCORES, IDS, bal, 0) \
        == (11, ZoneTag.F_PLUS)
    assert select_query(StrategyConfig(kind="fzero_only"), SCORES, IDS, bal, 0) \
        == (10, ZoneTag.F_ZERO)
    assert select_query(StrategyConfig(kind="fminus_only"), SCORES, IDS, bal, 0) \
        == (12, ZoneTag.F_MINUS)


def test_fzero_is_uncertainty_sampling():
    rng = np.random.default_rng(0)
    scores = rng.normal(size=30)
    ids = np.arange(30)
    sid, _ = select_query(StrategyConfig(kind="fzero_only"), scores, ids,
                          BalanceStat(), 0)
    assert sid == int(np.argmin(np.abs(scores)))


def test_ties_break_to_lowest_index():
    scores = np.array([2.0, 2.0, 2.0])
    ids = np.array([5, 6, 7])
    sid, _ = select_query(StrategyConfig(kind="fplus_only"), scores, ids,
                          BalanceStat(), 0)
    assert sid == 5


def test_random_strategy_seeded():
    cfg = StrategyConfig(kind="random", seed=4)
    a = select_query(cfg, SCORES, IDS, BalanceStat(), t=9)
    b = select_query(cfg, SCORES, IDS, BalanceStat(), t=9)
    assert a == b
    # the reported zone is the picked sample's actual zone
    sid, zone = a
    actual = partition(SCORES)[list(IDS).index(sid)]
    assert zone == actual


def test_select_query_determinism():
    cfg = StrategyConfig(kind="mcle")
    bal = BalanceStat(n_pos=3, n_neg=3)
    assert select_query(cfg, SCORES, IDS, bal, 20) == \
        select_query(cfg, SCORES, IDS, bal, 20)


def test_select_query_errors():
    cfg = StrategyConfig()
    with pytest.raises(ValueError, match="empty"):
        select_query(cfg, np.array([]), np.array([]), BalanceStat(), 0)
    with pytest.raises(ValueError, match="align"):
        select_query(cfg, np.array([1.0, 2.0]), np.array([1]), BalanceStat(), 0)


def test_strategy_config_validation():
    with pytest.raises(ValueError, match="unknown strategy"):
        StrategyConfig(kind="entropy")
    with pytest.raises(ValueError, match="rho_prime"):
        StrategyConfig(rho_prime=1.0)
    with pytest.raises(ValueError):
        StrategyConfig(burn_in=-1)


# ---------------------------------------------------------------------------
# Fair-coin balance property (statistical)
# ---------------------------------------------------------------------------

def test_fair_coin_rho_concentrates():
    """With coin-flip labels, rho after 200 mcle queries stays near 0.5."""
    cfg = StrategyConfig(kind="mcle", rho_prime=0.5)
    ok = 0
    n_runs = 100
    for seed in range(n_runs):
        rng = np.random.default_rng(seed)
        scores = rng.normal(scale=1.5, size=400)
        ids = np.arange(400)
        remaining = np.ones(400, dtype=bool)
        bal = BalanceStat()
        for t in range(200):
            idx = np.flatnonzero(remaining)
            sid, _ = select_query(cfg, scores[idx], ids[idx], bal, t)
            remaining[sid] = False
            bal = update_balance(bal, 1 if rng.random() < 0.5 else -1)
        if abs(bal.rho - 0.5) <= 0.1:
            ok += 1
    assert ok >= 0.95 * n_runs
