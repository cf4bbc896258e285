"""Budget-matched reference searchers.

All baselines share the optimizer's evaluation contract: candidates are
pre-sampled from the stream, scored through a caller-supplied batch
evaluator that charges one budget unit per candidate, and committed in
candidate order. Records are emitted per iteration (zero-order) or per
chunk of evaluations (pure random searchers).
"""
import time
from dataclasses import dataclass

import numpy as np

from .cem import Candidate, SearchAbort
from .records import RunRecord, mean_pairwise_l2
from .subspace import reconstruct


@dataclass(frozen=True)
class ZoConfig:
    """Zero-order neighborhood search parameters.

    Neighbors are drawn by norm-preserving spherical interpolation
    ``sqrt(1 - lambda^2) * center + lambda * eps`` so candidates stay
    distributionally valid for the generator prior.
    """

    n_iter: int = 20
    batch: int = 10
    step_lambda: float = 0.25

    def __post_init__(self):
        if self.n_iter < 1 or self.batch < 1:
            raise ValueError("n_iter and batch must be >= 1")
        if not (0.0 < self.step_lambda <= 1.0):
            raise ValueError(f"step_lambda must lie in (0, 1], got {self.step_lambda}")


@dataclass
class BaselineResult:
    best: Candidate
    records: list
    eval_log: list


def _better(a, b):
    if b is None:
        return a
    if (a.score, -a.eval_index) > (b.score, -b.eval_index):
        return a
    return b


def _run_chunks(evaluate, draw_batch, total, rng, record_chunk):
    """Common chunked loop for the memoryless random searchers."""
    best = None
    records = []
    eval_log = []
    generation = 0
    done = 0
    best_score = -np.inf
    while done < total:
        n = min(record_chunk, total - done)
        tic = time.perf_counter()
        payloads, fields = draw_batch(n, rng)
        try:
            scores, diversity_items = evaluate(fields)
        except Exception as exc:
            raise SearchAbort(
                f"scorer failed after {done} evaluations: {exc}", records, eval_log
            ) from exc
        scores = np.asarray(scores, dtype=np.float64)
        for i in range(n):
            cand = Candidate(u=payloads[i], score=float(scores[i]), eval_index=done + i)
            eval_log.append((cand.eval_index, cand.score))
            best = _better(cand, best)
        done += n
        generation += 1
        best_score = max(best_score, float(scores.max()))
        records.append(
            RunRecord(
                generation=generation,
                nre_used=done,
                best_score_so_far=best_score,
                gen_mean_score=float(scores.mean()),
                mu_norm=float("nan"),
                var_trace_mean=float("nan"),
                diversity=mean_pairwise_l2(diversity_items),
                wall_time=time.perf_counter() - tic,
            )
        )
    return BaselineResult(best=best, records=records, eval_log=eval_log)


def best_of_n(evaluate, shape, budget, rng, record_chunk=10):
    """Score ``budget.total`` independent prior draws and keep the argmax."""
    if budget.total < 1:
        raise ValueError("best-of-n needs a budget of at least 1")

    def draw(n, stream):
        fields = [stream.standard_normal(shape) for _ in range(n)]
        return fields, fields

    return _run_chunks(evaluate, draw, budget.total, rng, record_chunk)


def random_search_subspace(evaluate, subspace, budget, rng, record_chunk=10):
    """Independent standard-normal draws restricted to a search subspace."""
    if budget.total < 1:
        raise ValueError("random subspace search needs a budget of at least 1")

    def draw(n, stream):
        us = [stream.standard_normal(subspace.low_dim) for _ in range(n)]
        fields = [reconstruct(u, subspace) for u in us]
        return us, fields

    return _run_chunks(evaluate, draw, budget.total, rng, record_chunk)


def zero_order(evaluate, shape, budget, cfg, rng):
    """Greedy neighborhood search around a moving center.

    The initial center is a prior draw (never scored); each iteration
    scores ``batch`` spherical neighbors and moves the center to the best
    scorer seen so far. Consumes exactly ``n_iter * batch`` evaluations.
    """
    spend = cfg.n_iter * cfg.batch
    if spend > budget.total:
        raise ValueError(
            f"zero-order schedule needs {spend} evaluations, budget holds {budget.total}"
        )
    center = rng.standard_normal(shape)
    lam = cfg.step_lambda
    keep = np.sqrt(1.0 - lam * lam)
    best = None
    records = []
    eval_log = []
    for it in range(1, cfg.n_iter + 1):
        tic = time.perf_counter()
        neighbors = [keep * center + lam * rng.standard_normal(shape) for _ in range(cfg.batch)]
        try:
            scores, diversity_items = evaluate(neighbors)
        except Exception as exc:
            raise SearchAbort(
                f"scorer failed in iteration {it}: {exc}", records, eval_log
            ) from exc
        scores = np.asarray(scores, dtype=np.float64)
        start = (it - 1) * cfg.batch
        iteration_best = None
        for i in range(cfg.batch):
            cand = Candidate(u=neighbors[i], score=float(scores[i]), eval_index=start + i)
            eval_log.append((cand.eval_index, cand.score))
            iteration_best = _better(cand, iteration_best)
        best = _better(iteration_best, best)
        center = best.u
        records.append(
            RunRecord(
                generation=it,
                nre_used=it * cfg.batch,
                best_score_so_far=best.score,
                gen_mean_score=float(scores.mean()),
                mu_norm=float("nan"),
                var_trace_mean=float("nan"),
                diversity=mean_pairwise_l2(diversity_items),
                wall_time=time.perf_counter() - tic,
            )
        )
    return BaselineResult(best=best, records=records, eval_log=eval_log)
