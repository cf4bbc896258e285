"""Deterministic child RNG streams derived from one master seed.

Every random purpose in a run (reference noise, per-generation sampling,
finalization, probes, ...) gets its own stream keyed by stable string or
integer labels, so the draw order of one consumer can never perturb
another -- a requirement for records that are byte-identical under serial
and parallel evaluation.
"""
import hashlib

import numpy as np


def _code(label):
    if isinstance(label, (int, np.integer)):
        return int(label)
    digest = hashlib.sha256(str(label).encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "little")


def child_seed(master_seed, *labels):
    return np.random.SeedSequence([int(master_seed)] + [_code(lab) for lab in labels])


def child_rng(master_seed, *labels):
    return np.random.default_rng(child_seed(master_seed, *labels))
