"""Cross-entropy search over the low-frequency coordinates.

The optimizer keeps a diagonal Gaussian over the search vector, initialized
at the prior (zero mean, unit variance), and loops sample -> evaluate ->
prune-to-elites -> momentum update. The elite pool is cumulative: each
round the fresh candidates are merged with the surviving elites and the
union is pruned back to the top K by score (ties broken by earlier
evaluation ordinal), so good candidates from old rounds keep steering the
distribution.

Updates follow a momentum rule with smoothing factor ``gamma``:

    mu'     = (1 - gamma) * mean(elite u) + gamma * mu
    sigma2' = (1 - gamma) * var(elite u)  + gamma * sigma2

where ``var`` is the biased (divide-by-K) per-coordinate variance about
the elite mean, clamped below by a small floor so sampling never becomes
degenerate.

Evaluation is delegated to a caller-supplied batch scorer; candidates are
all sampled from the RNG before any evaluation is dispatched, and results
are committed in candidate order, which makes parallel and serial
evaluation indistinguishable.
"""
import time
from dataclasses import dataclass, field

import numpy as np

from .records import RunRecord, mean_pairwise_l2

DEFAULT_VARIANCE_FLOOR = 1e-8


class BudgetExceeded(RuntimeError):
    pass


@dataclass
class Budget:
    """Reward-evaluation budget; ``used`` never exceeds ``total``."""

    total: int
    used: int = 0

    def __post_init__(self):
        if self.total < 0:
            raise ValueError(f"budget total must be >= 0, got {self.total}")
        import threading

        self._lock = threading.Lock()

    def charge(self, n=1):
        with self._lock:
            if self.used + n > self.total:
                raise BudgetExceeded(
                    f"budget exhausted: {self.used} used + {n} requested > {self.total}"
                )
            self.used += n

    @property
    def remaining(self):
        return self.total - self.used


@dataclass(frozen=True)
class SearchDistribution:
    """Diagonal Gaussian over the search coordinates."""

    mu: np.ndarray
    sigma2: np.ndarray
    variance_floor: float = DEFAULT_VARIANCE_FLOOR

    def __post_init__(self):
        if self.mu.shape != self.sigma2.shape or self.mu.ndim != 1:
            raise ValueError("mu and sigma2 must be 1-D vectors of equal length")
        if not (np.isfinite(self.mu).all() and np.isfinite(self.sigma2).all()):
            raise ValueError("distribution parameters must be finite")
        if np.any(self.sigma2 < self.variance_floor):
            raise ValueError("sigma2 entries below the variance floor")

    @property
    def dim(self):
        return self.mu.size


def init_distribution(dim, variance_floor=DEFAULT_VARIANCE_FLOOR):
    """Prior-matched start: zero mean, unit variance."""
    if dim < 1:
        raise ValueError(f"dim must be >= 1, got {dim}")
    return SearchDistribution(
        mu=np.zeros(dim), sigma2=np.ones(dim), variance_floor=variance_floor
    )


def sample_generation(d, n, rng):
    """Draw ``n`` candidates ``mu + sqrt(sigma2) * z`` as an (n, dim) array."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    z = rng.standard_normal((n, d.dim))
    return d.mu[None, :] + np.sqrt(d.sigma2)[None, :] * z


@dataclass(frozen=True)
class Candidate:
    u: np.ndarray
    score: float
    eval_index: int


class ElitePool:
    """Top-K candidates by score, ties resolved by earlier eval_index."""

    def __init__(self, capacity, members=()):
        if capacity < 1:
            raise ValueError(f"elite capacity must be >= 1, got {capacity}")
        self.capacity = capacity
        self.members = sorted(members, key=lambda c: (-c.score, c.eval_index))[:capacity]

    def merged(self, candidates):
        """Cumulative union with fresh candidates, pruned back to capacity."""
        return ElitePool(self.capacity, list(self.members) + list(candidates))

    @property
    def best(self):
        if not self.members:
            raise ValueError("elite pool is empty")
        return self.members[0]

    def __len__(self):
        return len(self.members)


def update_distribution(d, elites, gamma):
    """Momentum update of the distribution towards the elite statistics."""
    if not (0.0 <= gamma <= 1.0):
        raise ValueError(f"gamma must lie in [0, 1], got {gamma}")
    members = elites.members if isinstance(elites, ElitePool) else list(elites)
    if not members:
        raise ValueError("cannot update from an empty elite set")
    us = np.stack([c.u for c in members])
    elite_mu = us.mean(axis=0)
    elite_var = np.mean((us - elite_mu[None, :]) ** 2, axis=0)
    mu = (1.0 - gamma) * elite_mu + gamma * d.mu
    sigma2 = (1.0 - gamma) * elite_var + gamma * d.sigma2
    sigma2 = np.maximum(sigma2, d.variance_floor)
    return SearchDistribution(mu=mu, sigma2=sigma2, variance_floor=d.variance_floor)


def finalize(d, pool, mode, rng=None):
    """Pick the final search vector.

    ``sample_distribution`` draws from the optimized Gaussian (the default
    behavior); ``best_seen`` deterministically returns the top pool member.
    """
    if mode == "best_seen":
        return pool.best.u.copy()
    if mode == "sample_distribution":
        if rng is None:
            raise ValueError("sample_distribution finalize requires an rng")
        return d.mu + np.sqrt(d.sigma2) * rng.standard_normal(d.dim)
    raise ValueError(f"unknown finalize mode {mode!r}")


@dataclass(frozen=True)
class SesConfig:
    n_per_gen: int = 10
    elite_k: int = 5
    gamma: float = 1e-5
    variance_floor: float = DEFAULT_VARIANCE_FLOOR
    finalize_mode: str = "sample_distribution"

    def __post_init__(self):
        if self.n_per_gen < 1:
            raise ValueError("n_per_gen must be >= 1")
        if not (1 <= self.elite_k <= self.n_per_gen):
            raise ValueError("elite_k must lie in [1, n_per_gen]")
        if not (0.0 <= self.gamma <= 1.0):
            raise ValueError("gamma must lie in [0, 1]")
        if self.finalize_mode not in ("sample_distribution", "best_seen"):
            raise ValueError(f"unknown finalize mode {self.finalize_mode!r}")


class SearchAbort(RuntimeError):
    """Scorer failure mid-run; carries the records gathered so far."""

    def __init__(self, message, records, eval_log):
        super().__init__(message)
        self.records = records
        self.eval_log = eval_log


@dataclass
class SesResult:
    best: Candidate
    final: SearchDistribution
    records: list
    eval_log: list
    pool: ElitePool = field(repr=False, default=None)


def run_ses(evaluate, dim, budget, cfg, rng):
    """Run the full sample-evaluate-update loop.

    ``evaluate(us)`` scores a ``(n, dim)`` batch and returns
    ``(scores, diversity_items)`` where the optional second element is a
    list of arrays whose mean pairwise distance is recorded per round.
    Executes ``budget.total // n_per_gen`` generations; leftover budget
    below one generation is left unspent.
    """
    if budget.total < cfg.n_per_gen:
        raise ValueError(
            f"budget smaller than one generation: {budget.total} < {cfg.n_per_gen}"
        )
    n_generations = budget.total // cfg.n_per_gen
    dist = init_distribution(dim, cfg.variance_floor)
    pool = ElitePool(cfg.elite_k)
    records = []
    eval_log = []
    best_so_far = -np.inf

    for gen in range(1, n_generations + 1):
        tic = time.perf_counter()
        us = sample_generation(dist, cfg.n_per_gen, rng)
        start_index = len(eval_log)
        try:
            scores, diversity_items = evaluate(us)
        except Exception as exc:
            raise SearchAbort(
                f"scorer failed in generation {gen}: {exc}", records, eval_log
            ) from exc
        scores = np.asarray(scores, dtype=np.float64)
        if scores.shape != (cfg.n_per_gen,):
            raise ValueError(
                f"scorer returned {scores.shape}, expected ({cfg.n_per_gen},)"
            )
        candidates = [
            Candidate(u=us[i].copy(), score=float(scores[i]), eval_index=start_index + i)
            for i in range(cfg.n_per_gen)
        ]
        eval_log.extend((c.eval_index, c.score) for c in candidates)
        best_so_far = max(best_so_far, float(scores.max()))
        records.append(
            RunRecord(
                generation=gen,
                nre_used=len(eval_log),
                best_score_so_far=best_so_far,
                gen_mean_score=float(scores.mean()),
                mu_norm=float(np.linalg.norm(dist.mu)),
                var_trace_mean=float(dist.sigma2.mean()),
                diversity=mean_pairwise_l2(diversity_items),
                wall_time=time.perf_counter() - tic,
            )
        )
        pool = pool.merged(candidates)
        dist = update_distribution(dist, pool, cfg.gamma)

    expected = cfg.n_per_gen * n_generations
    if budget.used != expected:
        raise RuntimeError(
            f"budget accounting drifted: {budget.used} used, expected {expected}"
        )
    return SesResult(best=pool.best, final=dist, records=records,
                     eval_log=eval_log, pool=pool)
