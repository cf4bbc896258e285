import numpy as np
import pytest
from scipy.stats import kstest

from specevo.cem import (
    Budget,
    BudgetExceeded,
    Candidate,
    ElitePool,
    SearchAbort,
    SesConfig,
    finalize,
    init_distribution,
    run_ses,
    sample_generation,
    update_distribution,
)


def make_pool(*score_index_pairs, capacity=5, dim=1, u_value=None):
    members = []
    for s, i in score_index_pairs:
        u = np.full(dim, float(i) if u_value is None else u_value)
        members.append(Candidate(u=u, score=s, eval_index=i))
    return ElitePool(capacity, members)


def test_init_distribution():
    d = init_distribution(64)
    np.testing.assert_array_equal(d.mu, np.zeros(64))
    np.testing.assert_array_equal(d.sigma2, np.ones(64))
    d1 = init_distribution(1)
    assert d1.mu.tolist() == [0.0] and d1.sigma2.tolist() == [1.0]
    with pytest.raises(ValueError):
        init_distribution(0)


def test_initial_sampling_matches_prior():
    # KS test against the standard normal CDF (direct-sampler oracle)
    d = init_distribution(4)
    rng = np.random.default_rng(0)
    draws = sample_generation(d, 5000, rng).ravel()
    stat = kstest(draws, "norm")
    assert stat.pvalue > 0.01


def test_sampling_deterministic():
    d = init_distribution(8)
    a = sample_generation(d, 10, np.random.default_rng(42))
    b = sample_generation(d, 10, np.random.default_rng(42))
    np.testing.assert_array_equal(a, b)


def test_sampling_mean_clt_bound():
    d = init_distribution(5)
    rng = np.random.default_rng(1)
    draws = sample_generation(d, 100_000, rng)
    # per-coordinate standard error is sqrt(sigma2/n) = 1/sqrt(n)
    bound = 3.0 / np.sqrt(100_000)
    assert np.abs(draws.mean(axis=0) - d.mu).max() < bound


def test_sampling_degenerate_variance():
    floor = 1e-8
    d = init_distribution(3, variance_floor=floor)
    # single elite: variance collapses to the floor
    d = update_distribution(d, make_pool((1.0, 0), dim=3), gamma=0.0)
    draws = sample_generation(d, 100, np.random.default_rng(2))
    assert np.abs(draws - d.mu[None, :]).max() < 1e-3  # floor-scale noise only


def test_update_gamma_one_keeps_distribution():
    d = init_distribution(4)
    pool = make_pool((3.0, 0), (1.0, 1))
    d2 = update_distribution(d, pool, gamma=1.0)
    np.testing.assert_array_equal(d2.mu, d.mu)
    np.testing.assert_array_equal(d2.sigma2, d.sigma2)


def test_update_gamma_zero_equals_elite_stats():
    d = init_distribution(1)
    pool = ElitePool(3, [
        Candidate(u=np.array([1.0]), score=5.0, eval_index=0),
        Candidate(u=np.array([2.0]), score=4.0, eval_index=1),
        Candidate(u=np.array([6.0]), score=3.0, eval_index=2),
    ])
    d2 = update_distribution(d, pool, gamma=0.0)
    assert d2.mu[0] == pytest.approx(3.0)
    # biased divide-by-K variance about the elite mean
    assert d2.sigma2[0] == pytest.approx(((1 - 3) ** 2 + (2 - 3) ** 2 + (6 - 3) ** 2) / 3)


def test_update_small_gamma_arithmetic():
    d = init_distribution(1)
    pool = make_pool((1.0, 0), u_value=1.0)  # elite mean 1.0 against mu 0
    d2 = update_distribution(d, pool, gamma=1e-5)
    assert d2.mu[0] == pytest.approx(0.99999)


def test_update_validation():
    d = init_distribution(2)
    with pytest.raises(ValueError, match="empty"):
        update_distribution(d, ElitePool(3), gamma=0.5)
    with pytest.raises(ValueError, match="gamma"):
        update_distribution(d, make_pool((1.0, 0)), gamma=1.5)


def test_variance_floor_clamped():
    d = init_distribution(2, variance_floor=1e-8)
    pool = make_pool((1.0, 0))  # single elite: zero variance
    d2 = update_distribution(d, pool, gamma=0.0)
    assert np.all(d2.sigma2 == 1e-8)


def test_elite_pool_order_and_ties():
    pool = make_pool((1.0, 5), (3.0, 2), (3.0, 1), (2.0, 0), capacity=3)
    scores = [c.score for c in pool.members]
    indices = [c.eval_index for c in pool.members]
    assert scores == [3.0, 3.0, 2.0]
    assert indices == [1, 2, 0]  # equal scores: earlier evaluation first
    assert pool.best.eval_index == 1


def test_elite_pool_cumulative_dominance():
    pool = make_pool((5.0, 0), (4.0, 1), capacity=2)
    newcomers = [Candidate(u=np.zeros(1), score=s, eval_index=i)
                 for s, i in [(6.0, 2), (1.0, 3)]]
    merged = pool.merged(newcomers)
    kept = {c.eval_index for c in merged.members}
    assert kept == {2, 0}
    discarded_scores = [c.score for c in [*pool.members, *newcomers]
                        if c.eval_index not in kept]
    assert min(c.score for c in merged.members) >= max(discarded_scores)


def test_budget_charging():
    b = Budget(total=3)
    b.charge(2)
    assert b.used == 2 and b.remaining == 1
    with pytest.raises(BudgetExceeded):
        b.charge(2)
    assert b.used == 2  # failed charge does not consume
    with pytest.raises(ValueError):
        Budget(total=-1)


def _quadratic_scorer(budget, target=2.0):
    def evaluate(us):
        budget.charge(len(us))
        scores = -np.sum((us - target) ** 2, axis=1)
        return scores, [u for u in us]
    return evaluate


def test_run_ses_generation_accounting():
    budget = Budget(total=200)
    cfg = SesConfig(n_per_gen=10, elite_k=5, gamma=1e-5)
    result = run_ses(_quadratic_scorer(budget), 4, budget, cfg, np.random.default_rng(0))
    assert len(result.records) == 20
    assert budget.used == 200
    assert result.records[-1].nre_used == 200


def test_run_ses_leftover_budget_unspent():
    budget = Budget(total=205)
    cfg = SesConfig(n_per_gen=10)
    run_ses(_quadratic_scorer(budget), 3, budget, cfg, np.random.default_rng(0))
    assert budget.used == 200


def test_run_ses_budget_too_small():
    budget = Budget(total=5)
    with pytest.raises(ValueError, match="budget smaller than one generation"):
        run_ses(_quadratic_scorer(budget), 3, budget, SesConfig(n_per_gen=10),
                np.random.default_rng(0))


def test_run_ses_monotone_best():
    budget = Budget(total=100)
    result = run_ses(_quadratic_scorer(budget), 6, budget, SesConfig(),
                     np.random.default_rng(3))
    best = [r.best_score_so_far for r in result.records]
    assert all(b >= a for a, b in zip(best, best[1:]))
    assert result.records[0].mu_norm == 0.0
    assert result.records[0].var_trace_mean == 1.0


def test_run_ses_deterministic():
    def go():
        budget = Budget(total=60)
        return run_ses(_quadratic_scorer(budget), 4, budget,
                       SesConfig(n_per_gen=6, elite_k=3), np.random.default_rng(9))
    r1, r2 = go(), go()
    assert r1.eval_log == r2.eval_log
    assert [rec.best_score_so_far for rec in r1.records] == \
           [rec.best_score_so_far for rec in r2.records]
    np.testing.assert_array_equal(r1.best.u, r2.best.u)


def test_run_ses_improves_on_quadratic():
    budget = Budget(total=300)
    result = run_ses(_quadratic_scorer(budget), 8, budget, SesConfig(),
                     np.random.default_rng(5))
    first_mean = result.records[0].gen_mean_score
    assert result.best.score > first_mean
    assert result.records[-1].mu_norm > 0.0


def test_run_ses_scorer_failure_aborts_with_partial_records():
    budget = Budget(total=100)
    calls = {"n": 0}

    def flaky(us):
        calls["n"] += 1
        if calls["n"] == 3:
            raise RuntimeError("backend fell over")
        budget.charge(len(us))
        return -np.sum(us ** 2, axis=1), None

    with pytest.raises(SearchAbort) as info:
        run_ses(flaky, 4, budget, SesConfig(), np.random.default_rng(0))
    assert len(info.value.records) == 2
    assert len(info.value.eval_log) == 20


def test_finalize_modes():
    pool = ElitePool(3, [
        Candidate(u=np.array([1.0, 0.0]), score=5.0, eval_index=4),
        Candidate(u=np.array([0.0, 1.0]), score=3.0, eval_index=1),
    ])
    d = init_distribution(2)
    np.testing.assert_array_equal(finalize(d, pool, "best_seen"), [1.0, 0.0])

    tie_pool = ElitePool(3, [
        Candidate(u=np.array([7.0]), score=5.0, eval_index=9),
        Candidate(u=np.array([8.0]), score=5.0, eval_index=2),
    ])
    assert finalize(init_distribution(1), tie_pool, "best_seen")[0] == 8.0

    floored = update_distribution(init_distribution(2), make_pool((1.0, 0)), gamma=0.0)
    drawn = finalize(floored, pool, "sample_distribution", np.random.default_rng(0))
    assert np.abs(drawn - floored.mu).max() < 1e-3

    with pytest.raises(ValueError, match="unknown finalize mode"):
        finalize(d, pool, "median")
    with pytest.raises(ValueError, match="rng"):
        finalize(d, pool, "sample_distribution")


def test_ses_config_validation():
    with pytest.raises(ValueError):
        SesConfig(elite_k=11, n_per_gen=10)
    with pytest.raises(ValueError):
        SesConfig(gamma=-0.1)
    with pytest.raises(ValueError):
        SesConfig(finalize_mode="argmax")
