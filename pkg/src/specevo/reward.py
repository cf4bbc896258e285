"""Reward functionals over generator outputs, plus ranking diagnostics.

A scoring call always performs the full candidate generation (ODE
integration at the evaluation mode's step count) followed by the reward
functional, and charges exactly one budget unit -- the budget counts
search breadth, not integration effort, so cheap proxy modes (fewer
steps) cost the same as accurate ones.

Built-in functionals:

* ``template_lowfreq``: negative squared distance between the coarse
  wavelet blocks of the output and of a template field.
* ``band_energy``: spectral energy of the output inside a radial band.
* ``neg_l2``: negative squared distance to a target field.
* ``external``: delegates generation and scoring to a bridge subprocess
  over the line-delimited wire protocol.
"""
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.stats import kendalltau

from .spectral import Band, radial_norm_grid
from .wavelet import as_field, dwt2

REWARD_KINDS = ("template_lowfreq", "band_energy", "neg_l2", "external")


@dataclass(frozen=True)
class EvalMode:
    """ODE step count used when scoring (proxy: small, accurate: large)."""

    steps: int

    def __post_init__(self):
        if self.steps < 1:
            raise ValueError(f"steps must be >= 1, got {self.steps}")


PROXY_STEPS = 10
ACCURATE_STEPS = 50


@dataclass(frozen=True)
class RewardSpec:
    kind: str
    level: int = 4
    band: tuple | None = None
    target: np.ndarray | None = None
    command: tuple | None = None

    def __post_init__(self):
        if self.kind not in REWARD_KINDS:
            raise ValueError(f"unknown reward kind {self.kind!r}, expected one of {REWARD_KINDS}")
        if self.kind == "template_lowfreq" and self.level < 1:
            raise ValueError("template_lowfreq needs a decomposition level >= 1")
        if self.kind == "band_energy" and self.band is None:
            raise ValueError("band_energy needs a (lo, hi] radial band")
        if self.kind == "external" and not self.command:
            raise ValueError("external reward needs the bridge command line")


class Evaluator:
    """Scores noise fields against a generator + reward spec.

    ``score_batch`` may fan candidates out over a thread pool; results are
    committed in candidate order so parallel and serial execution produce
    identical logs. The second element of its return value carries the
    per-candidate arrays used for diversity statistics: generator outputs
    for in-process rewards, the submitted noise fields for the external
    kind (outputs never cross the wire).
    """

    def __init__(self, generator, spec, mode, budget, workers=1):
        self.generator = generator
        self.spec = spec
        self.mode = mode
        self.budget = budget
        self.workers = max(1, int(workers))
        self._client = None
        if spec.kind == "external":
            from .harness.protocol import BridgeClient

            self._client = BridgeClient(spec.command)
            self._client.handshake(expect_shape=tuple(generator.shape))
        elif spec.kind == "template_lowfreq":
            template = spec.target if spec.target is not None else generator.target
            if template is None:
                raise ValueError("template_lowfreq needs a template (spec.target or generator.target)")
            self._template_ll = dwt2(as_field(template), spec.level).ll
        elif spec.kind == "neg_l2":
            target = spec.target if spec.target is not None else generator.target
            if target is None:
                raise ValueError("neg_l2 needs a target (spec.target or generator.target)")
            self._target = as_field(target)
        elif spec.kind == "band_energy":
            _, h, w = generator.shape
            lo, hi = spec.band
            self._band_mask = Band(lo=float(lo), hi=float(hi)).mask(radial_norm_grid(h, w))
            if not self._band_mask.any():
                raise ValueError(f"band ({lo}, {hi}] holds no lattice frequency")

    def _functional(self, output):
        kind = self.spec.kind
        if kind == "template_lowfreq":
            delta = dwt2(output, self.spec.level).ll - self._template_ll
            return -float(np.sum(delta ** 2))
        if kind == "neg_l2":
            return -float(np.sum((output - self._target) ** 2))
        if kind == "band_energy":
            spec = np.fft.fft2(output, norm="ortho")
            return float(np.sum(np.abs(spec) ** 2, axis=0)[self._band_mask].sum())
        raise AssertionError(kind)

    def _check_shape(self, noise):
        if noise.shape != tuple(self.generator.shape):
            raise ValueError(
                f"noise shape {noise.shape} != generator shape {tuple(self.generator.shape)}"
            )

    def score(self, noise):
        """Generate from ``noise`` and apply the reward; charges 1 NRE."""
        noise = as_field(noise)
        self._check_shape(noise)
        self.budget.charge(1)
        if self._client is not None:
            return self._client.score(noise, steps=self.mode.steps)
        output = self.generator.integrate(noise, steps=self.mode.steps)
        return self._functional(output)

    def _score_with_output(self, noise):
        noise = as_field(noise)
        self._check_shape(noise)
        self.budget.charge(1)
        if self._client is not None:
            return self._client.score(noise, steps=self.mode.steps), None
        output = self.generator.integrate(noise, steps=self.mode.steps)
        return self._functional(output), output

    def score_batch(self, noises):
        """Score a list of fields; returns ``(scores, diversity_items)``."""
        noises = list(noises)
        if self.workers > 1 and self._client is None:
            with ThreadPoolExecutor(max_workers=self.workers) as pool:
                results = list(pool.map(self._score_with_output, noises))
        else:
            results = [self._score_with_output(x) for x in noises]
        scores = np.array([r[0] for r in results], dtype=np.float64)
        if self._client is not None:
            return scores, noises
        return scores, [r[1] for r in results]

    def close(self):
        if self._client is not None:
            self._client.close()
            self._client = None

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def ranking_consistency(scores_proxy, scores_accurate):
    """Tie-aware Kendall tau-b between two score lists."""
    a = np.asarray(scores_proxy, dtype=np.float64)
    b = np.asarray(scores_accurate, dtype=np.float64)
    if a.shape != b.shape or a.ndim != 1:
        raise ValueError(f"score lists must have equal 1-D shapes, got {a.shape} vs {b.shape}")
    if a.size < 2:
        raise ValueError("ranking consistency needs at least 2 scores")
    return float(kendalltau(a, b).statistic)
