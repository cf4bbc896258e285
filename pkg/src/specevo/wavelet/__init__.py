"""Multi-level 2D orthonormal Haar transform on C x H x W noise fields.

The transform is applied channel-wise and recursively to the coarse (LL)
band. Inputs must have height and width divisible by ``2**levels``; nothing
is padded, so the transform is exactly orthogonal and ``idwt2`` is an exact
inverse up to float roundoff.

Kernel backend: a compiled Cython core is used when built, otherwise a
vectorized numpy implementation. Set ``SPECEVO_PURE_PYTHON=1`` to force the
numpy path. Both produce identical coefficients.
"""
import os
from dataclasses import dataclass

import numpy as np

from . import _haar_np

if os.environ.get("SPECEVO_PURE_PYTHON"):
    _kernels = _haar_np
    BACKEND = "numpy"
else:
    try:
        from . import _haar_cy as _kernels
        BACKEND = "cython"
    except ImportError:
        _kernels = _haar_np
        BACKEND = "numpy"

__all__ = ["WaveletPyramid", "dwt2", "idwt2", "pyramid_energy", "as_field", "BACKEND"]


def as_field(x):
    """Validate and convert to a float64 C x H x W noise field."""
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim != 3:
        raise ValueError(f"noise field must be 3-dimensional (C, H, W), got shape {arr.shape}")
    if not np.isfinite(arr).all():
        raise ValueError("noise field contains non-finite entries")
    return arr


@dataclass(frozen=True)
class WaveletPyramid:
    """Coarse block plus per-level detail triples.

    ``details[k]`` holds the ``(lh, hl, hh)`` triple produced at level
    ``k+1`` (finest first), each of shape ``C x H/2**(k+1) x W/2**(k+1)``;
    ``ll`` is the coarse block at the deepest level.
    """

    ll: np.ndarray
    details: tuple

    @property
    def levels(self):
        return len(self.details)

    @property
    def full_shape(self):
        n_ch, h, w = self.ll.shape
        factor = 2 ** self.levels
        return (n_ch, h * factor, w * factor)


def _check_divisible(shape, levels):
    n = 2 ** levels
    _, h, w = shape
    if h % n:
        raise ValueError(f"height {h} not divisible by 2^{levels}")
    if w % n:
        raise ValueError(f"width {w} not divisible by 2^{levels}")


def dwt2(x, levels):
    """Decompose a noise field into ``levels`` Haar scales.

    Returns a :class:`WaveletPyramid` whose coefficients carry exactly the
    energy of ``x`` (orthonormal convention, 1/sqrt(2) taps).
    """
    x = as_field(x)
    if levels < 1:
        raise ValueError(f"levels must be >= 1, got {levels}")
    _check_divisible(x.shape, levels)
    details = []
    ll = x
    for _ in range(levels):
        ll, lh, hl, hh = _kernels.haar_analyze(ll)
        details.append((lh, hl, hh))
    return WaveletPyramid(ll=ll, details=tuple(details))


def idwt2(p):
    """Exact inverse of :func:`dwt2`."""
    ll = np.asarray(p.ll, dtype=np.float64)
    for level, (lh, hl, hh) in reversed(list(enumerate(p.details))):
        for name, band in (("lh", lh), ("hl", hl), ("hh", hh)):
            if band.shape != ll.shape:
                raise ValueError(
                    f"level {level + 1} band {name} has shape {band.shape}, "
                    f"expected {ll.shape}"
                )
        ll = _kernels.haar_synthesize(ll, np.asarray(lh, dtype=np.float64),
                                      np.asarray(hl, dtype=np.float64),
                                      np.asarray(hh, dtype=np.float64))
    return ll


def pyramid_energy(p):
    """Sum of squared coefficients over every band (Parseval check support)."""
    total = float(np.sum(np.square(p.ll)))
    for lh, hl, hh in p.details:
        total += float(np.sum(np.square(lh)) + np.sum(np.square(hl)) + np.sum(np.square(hh)))
    return total
