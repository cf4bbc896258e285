"""Per-generation run statistics shared by the optimizer and the harness."""
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class RunRecord:
    """One sampling round of a search run.

    ``mu_norm`` and ``var_trace_mean`` describe the distribution the round
    sampled from (so generation 1 always shows the prior: norm 0, variance
    1); strategies without a search distribution record them as NaN.
    ``wall_time`` is measured, hence excluded from the deterministic CSV.
    """

    generation: int
    nre_used: int
    best_score_so_far: float
    gen_mean_score: float
    mu_norm: float
    var_trace_mean: float
    diversity: float
    wall_time: float = 0.0


CSV_FIELDS = (
    "generation",
    "nre_used",
    "best_score_so_far",
    "gen_mean_score",
    "mu_norm",
    "var_trace_mean",
    "diversity",
)


def mean_pairwise_l2(items):
    """Mean pairwise Euclidean distance; NaN when fewer than two items."""
    if items is None or len(items) < 2:
        return float("nan")
    flat = np.stack([np.asarray(a, dtype=np.float64).ravel() for a in items])
    sq = np.sum(flat ** 2, axis=1)
    d2 = sq[:, None] + sq[None, :] - 2.0 * (flat @ flat.T)
    iu = np.triu_indices(len(items), k=1)
    return float(np.sqrt(np.maximum(d2[iu], 0.0)).mean())
