"""Low-frequency search coordinates over a frozen high-frequency anchor.

``decouple`` splits a reference noise field into the flattened coarse block
``u`` (the search coordinates) and an immutable anchor holding every detail
triple. ``reconstruct`` maps any ``u`` back to a full noise field through
the inverse transform; because the transform is orthonormal this is an
isometry onto an affine slice of the prior, so standard-normal ``u`` plus a
standard-normal anchor yields a field with i.i.d. standard-normal entries.

Ablation variants (high-frequency coordinates, the full coefficient space,
and a random raw-coordinate subset of matching dimensionality) support
search-space comparisons.
"""
from dataclasses import dataclass

import numpy as np

from .wavelet import WaveletPyramid, as_field, dwt2, idwt2


def _freeze(arr):
    out = np.ascontiguousarray(arr)
    out.flags.writeable = False
    return out


@dataclass(frozen=True)
class SpectralSubspace:
    """Frozen detail triples plus shape metadata for the u <-> field bijection."""

    frozen_details: tuple
    level: int
    ll_shape: tuple
    full_shape: tuple

    @property
    def low_dim(self):
        n_ch, h, w = self.ll_shape
        return n_ch * h * w


def decouple(x_init, level):
    """Split a noise field into search coordinates and a frozen anchor.

    Returns ``(u, subspace)`` where ``u`` is the coarse block flattened
    channel-major then row-major, of length ``C*H*W / 4**level``.
    """
    x_init = as_field(x_init)
    pyramid = dwt2(x_init, level)
    details = tuple(tuple(_freeze(band) for band in triple) for triple in pyramid.details)
    sub = SpectralSubspace(
        frozen_details=details,
        level=level,
        ll_shape=pyramid.ll.shape,
        full_shape=x_init.shape,
    )
    return pyramid.ll.ravel().copy(), sub


def reconstruct(u, s):
    """Rebuild a full noise field from low-frequency coordinates ``u``."""
    u = np.asarray(u, dtype=np.float64)
    if u.shape != (s.low_dim,):
        raise ValueError(f"u has length {u.size}, subspace expects {s.low_dim}")
    pyramid = WaveletPyramid(ll=u.reshape(s.ll_shape), details=s.frozen_details)
    return idwt2(pyramid)


ABLATION_KINDS = ("low_freq", "high_freq", "full", "random")


@dataclass(frozen=True)
class AblationSubspace:
    """Alternative search-coordinate mappings for subspace ablations.

    ``random`` holds an index set into the flattened raw field, drawn
    without replacement from a seeded stream; the other kinds address
    transform coefficients of the reference decomposition.
    """

    kind: str
    level: int
    full_shape: tuple
    indices: np.ndarray | None = None

    @property
    def dim(self):
        n_ch, h, w = self.full_shape
        full = n_ch * h * w
        low = full // 4 ** self.level
        if self.kind in ("low_freq", "random"):
            return low
        if self.kind == "high_freq":
            return full - low
        return full


def make_ablation(kind, reference, level, rng=None):
    """Build an ablation subspace against a reference noise field."""
    if kind not in ABLATION_KINDS:
        raise ValueError(f"unknown ablation kind {kind!r}, expected one of {ABLATION_KINDS}")
    reference = as_field(reference)
    indices = None
    if kind == "random":
        if rng is None:
            raise ValueError("random ablation requires a seeded rng")
        n_ch, h, w = reference.shape
        full = n_ch * h * w
        low = full // 4 ** level
        indices = _freeze(np.sort(rng.choice(full, size=low, replace=False)))
    return AblationSubspace(kind=kind, level=level, full_shape=reference.shape, indices=indices)


def _flatten_details(details):
    return np.concatenate([band.ravel() for triple in details for band in triple])


def _unflatten_details(v, template):
    triples = []
    pos = 0
    for triple in template:
        bands = []
        for band in triple:
            n = band.size
            bands.append(v[pos:pos + n].reshape(band.shape))
            pos += n
        triples.append(tuple(bands))
    return tuple(triples), pos


def ablation_reconstruct(v, a, reference):
    """Map ablation coordinates ``v`` to a full noise field.

    high_freq: ``v`` supplies every detail coefficient, the coarse block is
    frozen from the reference. full: ``v`` is the entire coefficient vector
    (coarse block first, then detail triples finest to coarsest). random:
    ``v`` overwrites the selected raw coordinates, the complement is taken
    from the reference.
    """
    v = np.asarray(v, dtype=np.float64)
    if v.shape != (a.dim,):
        raise ValueError(f"v has length {v.size}, ablation subspace expects {a.dim}")
    reference = as_field(reference)
    if reference.shape != a.full_shape:
        raise ValueError(f"reference shape {reference.shape} != subspace shape {a.full_shape}")

    if a.kind == "random":
        out = reference.copy()
        out.ravel()[a.indices] = v
        return out

    pyramid = dwt2(reference, a.level)
    if a.kind == "low_freq":
        return idwt2(WaveletPyramid(ll=v.reshape(pyramid.ll.shape), details=pyramid.details))
    if a.kind == "high_freq":
        details, used = _unflatten_details(v, pyramid.details)
        assert used == v.size
        return idwt2(WaveletPyramid(ll=pyramid.ll, details=details))
    # full coefficient space
    n_low = pyramid.ll.size
    ll = v[:n_low].reshape(pyramid.ll.shape)
    details, used = _unflatten_details(v[n_low:], pyramid.details)
    assert n_low + used == v.size
    return idwt2(WaveletPyramid(ll=ll, details=details))
