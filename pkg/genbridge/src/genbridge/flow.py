"""Independent mirror of the analytic Wiener-flow generator and rewards.

Kept deliberately free of any dependency on the in-process package: the
rectified schedule, the power-law MMSE filter, and the Euler recursion are
restated here from first principles, with scipy's FFTs doing the spectral
work. The transform convention is unitary, frequencies are in cycles per
sample, and the DC cell is assigned the smallest nonzero radial norm.
"""
import base64

import numpy as np
from scipy import fft as sfft


def decode_noise(payload_b64, shape):
    """float32 little-endian row-major payload -> float64 field."""
    try:
        raw = base64.b64decode(payload_b64, validate=True)
    except Exception as exc:
        raise ValueError(f"invalid base64 payload: {exc}") from exc
    expected = 4 * int(np.prod(shape))
    if len(raw) != expected:
        raise ValueError(
            f"payload holds {len(raw)} bytes, expected {expected} for shape {tuple(shape)}"
        )
    return np.frombuffer(raw, dtype="<f4").reshape(shape).astype(np.float64)


def _radial_norms(h, w, half=False):
    fy = np.fft.fftfreq(h)
    fx = np.fft.rfftfreq(w) if half else np.fft.fftfreq(w)
    norms = np.hypot(fy[:, None], fx[None, :])
    return np.where(norms == 0, 1.0 / max(h, w), norms)


def block_coarse(field, level):
    """Deepest-level coarse Haar block via plain block sums.

    For the orthonormal Haar family the J-level coarse coefficient over a
    ``2^J x 2^J`` block is the block sum divided by ``2^J``.
    """
    n_ch, h, w = field.shape
    step = 2 ** level
    blocks = field.reshape(n_ch, h // step, step, w // step, step)
    return blocks.sum(axis=(2, 4)) / step


class MirrorGenerator:
    """Noise -> score map mirrored from a validated bridge config."""

    def __init__(self, cfg):
        self.shape = tuple(cfg["shape"])
        self.beta = float(cfg["beta"])
        self.amplitude = float(cfg["amplitude"])
        self.clip = float(cfg["clip"])
        self.default_steps = int(cfg["default_steps"])
        self.reward = cfg["reward"]
        _, h, w = self.shape
        self._power_half = self.amplitude * _radial_norms(h, w, half=True) ** (-self.beta)
        self._target = None
        self._template_coarse = None
        self._band_mask = None
        if self.reward["kind"] in ("template_lowfreq", "neg_l2"):
            if self.reward.get("target") == "zero":
                self._target = np.zeros(self.shape)
            else:
                self._target = self._sample_target(cfg["target_seed"])
            if self.reward["kind"] == "template_lowfreq":
                self._template_coarse = block_coarse(self._target, self.reward["level"])
        if self.reward["kind"] == "band_energy":
            lo, hi = self.reward["band"]
            norms = np.hypot(np.fft.fftfreq(h)[:, None], np.fft.fftfreq(w)[None, :])
            self._band_mask = (norms > lo) & (norms <= hi)

    def _sample_target(self, seed):
        _, h, w = self.shape
        amp = np.sqrt(self.amplitude * _radial_norms(h, w) ** (-self.beta))
        white = np.random.default_rng(seed).standard_normal(self.shape)
        spec = sfft.fft2(white, norm="ortho") * amp
        return sfft.ifft2(spec, norm="ortho").real

    def generate(self, noise, steps=None):
        """Euler-integrate the rectified flow in the spectral basis."""
        n_steps = self.default_steps if steps is None else int(steps)
        if n_steps < 1:
            raise ValueError(f"steps must be >= 1, got {n_steps}")
        t0, t1 = self.clip, 1.0 - self.clip
        dt = (t1 - t0) / n_steps
        spec = sfft.rfft2(noise, norm="ortho")
        power = self._power_half
        for k in range(n_steps):
            t = t0 + k * dt
            alpha, sigma = t, 1.0 - t
            snr = (alpha / sigma) ** 2 * power
            h_gain = snr / (snr + 1.0) / alpha
            mu = 1.0 + alpha / sigma
            nu = -1.0 / sigma
            spec *= 1.0 + dt * (mu * h_gain + nu)
        return sfft.irfft2(spec, s=self.shape[-2:], norm="ortho")

    def score(self, noise, steps=None):
        if noise.shape != self.shape:
            raise ValueError(f"noise shape {noise.shape} != configured {self.shape}")
        output = self.generate(noise, steps)
        kind = self.reward["kind"]
        if kind == "template_lowfreq":
            delta = block_coarse(output, self.reward["level"]) - self._template_coarse
            return -float(np.sum(delta ** 2))
        if kind == "neg_l2":
            return -float(np.sum((output - self._target) ** 2))
        spec = sfft.fft2(output, norm="ortho")
        return float(np.sum(np.abs(spec) ** 2, axis=0)[self._band_mask].sum())
