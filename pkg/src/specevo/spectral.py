"""Spectral measurement utilities on the 2D frequency lattice.

Frequencies are measured in cycles per sample (``np.fft.fftfreq`` units),
so the radial norm runs from ``1/max(H, W)`` up to ``sqrt(0.5^2 + 0.5^2)``
on an even grid. All spectral transforms use the unitary convention so
Parseval holds with constant 1. Radial bins and band partitions are
log-spaced: the DC cell is excluded everywhere, and each annulus is
half-open ``(lo, hi]`` except the first, which includes its lower edge.
"""
from dataclasses import dataclass

import numpy as np

from .wavelet import as_field

__all__ = [
    "radial_norm_grid",
    "Band",
    "partition_bands",
    "RadialProfile",
    "radial_psd",
    "PowerLawFit",
    "fit_power_law",
    "bandpass_perturbation",
    "synth_power_law_field",
]


def radial_norm_grid(h, w):
    """Radial frequency norms ``|omega|`` for an H x W lattice (DC cell = 0)."""
    fy = np.fft.fftfreq(h)
    fx = np.fft.fftfreq(w)
    return np.hypot(fy[:, None], fx[None, :])


def min_nonzero_norm(h, w):
    return 1.0 / max(h, w)


@dataclass(frozen=True)
class Band:
    """Radial annulus ``(lo, hi]``; ``closed_lo`` additionally admits ``lo``."""

    lo: float
    hi: float
    closed_lo: bool = False

    @property
    def representative(self):
        return float(np.sqrt(self.lo * self.hi))

    def mask(self, norms):
        inside = (norms > self.lo) & (norms <= self.hi)
        if self.closed_lo:
            inside |= np.isclose(norms, self.lo)
        return inside


def _log_edges(h, w, n):
    return np.geomspace(min_nonzero_norm(h, w), float(radial_norm_grid(h, w).max()), n + 1)


def partition_bands(grid_shape, n_bands):
    """Split all nonzero lattice frequencies into log-spaced radial annuli.

    Returns ``n_bands`` disjoint bands that jointly cover every nonzero
    frequency of an ``H x W`` grid; raises if any annulus would be empty.
    """
    if n_bands < 2:
        raise ValueError(f"n_bands must be >= 2, got {n_bands}")
    h, w = grid_shape
    edges = _log_edges(h, w, n_bands)
    norms = radial_norm_grid(h, w)
    bands = []
    for k in range(n_bands):
        band = Band(lo=float(edges[k]), hi=float(edges[k + 1]), closed_lo=(k == 0))
        if not band.mask(norms).any():
            raise ValueError(
                f"grid {h}x{w} too small for {n_bands} bands: "
                f"annulus ({band.lo:.4g}, {band.hi:.4g}] holds no lattice frequency"
            )
        bands.append(band)
    return bands


@dataclass(frozen=True)
class RadialProfile:
    bin_edges: np.ndarray
    mean_power: np.ndarray
    counts: np.ndarray

    @property
    def centers(self):
        return np.sqrt(self.bin_edges[:-1] * self.bin_edges[1:])


def radial_psd(x, n_bins):
    """Channel-averaged radial power spectral density.

    Power ``|x_hat|^2`` (unitary FFT) is averaged over channels, the DC cell
    is dropped, and the remaining lattice is averaged within ``n_bins``
    log-spaced radial bins. Bins that receive no lattice point on a small
    grid are not reported.
    """
    if n_bins < 2:
        raise ValueError(f"n_bins must be >= 2, got {n_bins}")
    x = as_field(x)
    _, h, w = x.shape
    spec = np.fft.fft2(x, norm="ortho")
    power = np.mean(np.abs(spec) ** 2, axis=0)
    norms = radial_norm_grid(h, w)
    edges = _log_edges(h, w, n_bins)

    keep = norms > 0
    idx = np.digitize(norms[keep], edges[1:-1], right=True)
    counts = np.bincount(idx, minlength=n_bins)
    sums = np.bincount(idx, weights=power[keep], minlength=n_bins)
    nonempty = counts > 0
    if not nonempty.all():
        # report only populated bins; edges stay aligned with kept bins
        lo = edges[:-1][nonempty]
        hi = edges[1:][nonempty]
        edges = np.append(lo, hi[-1])
        counts = counts[nonempty]
        sums = sums[nonempty]
    return RadialProfile(bin_edges=edges, mean_power=sums / counts, counts=counts)


@dataclass(frozen=True)
class PowerLawFit:
    exponent: float
    intercept: float
    r2: float


def fit_power_law(p):
    """Count-weighted least squares of log power against log radius."""
    if len(p.mean_power) < 3:
        raise ValueError(f"power-law fit needs >= 3 bins, got {len(p.mean_power)}")
    if np.any(p.mean_power <= 0):
        raise ValueError("power-law fit requires strictly positive bin powers")
    lx = np.log(p.centers)
    ly = np.log(p.mean_power)
    wts = p.counts.astype(np.float64)
    slope, intercept = np.polyfit(lx, ly, 1, w=np.sqrt(wts))
    resid = ly - (slope * lx + intercept)
    ss_res = float(np.sum(wts * resid ** 2))
    ybar = float(np.sum(wts * ly) / np.sum(wts))
    ss_tot = float(np.sum(wts * (ly - ybar) ** 2))
    r2 = 1.0 if ss_tot == 0 else max(0.0, 1.0 - ss_res / ss_tot)
    return PowerLawFit(exponent=float(slope), intercept=float(intercept), r2=float(r2))


def bandpass_perturbation(shape, band, rng):
    """Unit-L2-norm real field with spectral support confined to ``band``.

    White noise is masked to the annulus in the frequency domain and
    transformed back; the radial mask is symmetric so the result is real.
    """
    n_ch, h, w = shape
    mask = band.mask(radial_norm_grid(h, w))
    if not mask.any():
        raise ValueError(f"band ({band.lo:.4g}, {band.hi:.4g}] holds no lattice frequency")
    white = rng.standard_normal(shape)
    spec = np.fft.fft2(white, norm="ortho") * mask
    xi = np.fft.ifft2(spec, norm="ortho").real
    norm = float(np.linalg.norm(xi))
    if norm == 0:
        raise ValueError("degenerate band-pass draw with zero energy")
    return xi / norm


def synth_power_law_field(shape, exponent, rng):
    """Random field whose expected PSD is ``|omega|^exponent`` (DC zeroed).

    ``exponent`` is the power decay, e.g. -2.0 builds a field whose fitted
    radial PSD slope is -2.
    """
    n_ch, h, w = shape
    norms = radial_norm_grid(h, w)
    filt = np.zeros_like(norms)
    nz = norms > 0
    filt[nz] = norms[nz] ** (exponent / 2.0)
    white = rng.standard_normal(shape)
    spec = np.fft.fft2(white, norm="ortho") * filt
    return np.fft.ifft2(spec, norm="ortho").real
