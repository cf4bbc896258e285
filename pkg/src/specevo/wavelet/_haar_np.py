"""Vectorized numpy fallback for the single-level Haar kernels.

Orthonormal convention (1/sqrt(2) taps): for each 2x2 block
``[[a, b], [c, d]]`` the analysis produces ``ll=(a+b+c+d)/2``,
``lh=(a-b+c-d)/2`` (high-pass along width), ``hl=(a+b-c-d)/2``
(high-pass along height) and ``hh=(a-b-c+d)/2``. Synthesis inverts it
exactly. Both operate channel-wise on ``(C, h, w)`` float64 arrays.
"""
import numpy as np


def haar_analyze(x):
    a = x[:, 0::2, 0::2]
    b = x[:, 0::2, 1::2]
    c = x[:, 1::2, 0::2]
    d = x[:, 1::2, 1::2]
    ll = (a + b + c + d) * 0.5
    lh = (a - b + c - d) * 0.5
    hl = (a + b - c - d) * 0.5
    hh = (a - b - c + d) * 0.5
    return ll, lh, hl, hh


def haar_synthesize(ll, lh, hl, hh):
    n_ch, h, w = ll.shape
    out = np.empty((n_ch, 2 * h, 2 * w), dtype=np.float64)
    out[:, 0::2, 0::2] = (ll + lh + hl + hh) * 0.5
    out[:, 0::2, 1::2] = (ll - lh + hl - hh) * 0.5
    out[:, 1::2, 0::2] = (ll + lh - hl - hh) * 0.5
    out[:, 1::2, 1::2] = (ll - lh - hl + hh) * 0.5
    return out
