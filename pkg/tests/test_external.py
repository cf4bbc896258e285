"""External-reward integration; skipped entirely when no bridge is installed."""
import json
import sys

import numpy as np
import pytest

pytest.importorskip("genbridge")

from specevo.cem import Budget
from specevo.flowsim import PowerLawPrior, WienerFlowGenerator, sample_prior_realization
from specevo.harness.runner import run
from specevo.reward import Evaluator, EvalMode, RewardSpec

SHAPE = (1, 16, 16)


def bridge_command(tmp_path):
    cfg = {"shape": list(SHAPE), "beta": 1.3, "default_steps": 10,
           "target_seed": 4, "reward": {"kind": "neg_l2"}}
    path = tmp_path / "bridge.json"
    path.write_text(json.dumps(cfg))
    return [sys.executable, "-m", "genbridge", str(path)]


def test_external_scores_match_inprocess(tmp_path):
    prior = PowerLawPrior(beta=1.3)
    target = sample_prior_realization(prior, SHAPE, np.random.default_rng(4))
    g = WienerFlowGenerator(shape=SHAPE, prior=prior, steps=10, target=target)
    command = tuple(bridge_command(tmp_path))
    inproc = Evaluator(g, RewardSpec(kind="neg_l2"), EvalMode(steps=10), Budget(total=20))
    with Evaluator(g, RewardSpec(kind="external", command=command),
                   EvalMode(steps=10), Budget(total=20)) as external:
        rng = np.random.default_rng(0)
        for _ in range(10):
            noise = rng.standard_normal(SHAPE).astype(np.float32).astype(np.float64)
            assert external.score(noise) == pytest.approx(inproc.score(noise), abs=1e-5)


def test_full_run_through_external_generator(tmp_path):
    raw = {
        "strategy": "ses",
        "budget_nre": 30,
        "seed": 2,
        "generator": {"shape": list(SHAPE), "beta": 1.3, "steps": 10,
                      "target_seed": 4},
        "reward": {"kind": "external", "command": bridge_command(tmp_path)},
        "eval": {"steps": 10},
        "cem": {"level": 2, "finalize_mode": "best_seen"},
    }
    summary = run(raw, str(tmp_path / "external-run"))
    assert summary["nre_used"] == 30
