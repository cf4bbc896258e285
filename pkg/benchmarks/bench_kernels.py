"""Compare the compiled Haar kernels against the numpy fallback.

The single-level analyze/synthesize pair is the hot non-FFT kernel: every
candidate evaluation runs one multi-level reconstruction (and decoupling
runs the analysis). Run as::

    python benchmarks/bench_kernels.py

The import-time selection is bypassed here: both backends are imported
directly so one process can time them side by side.
"""
import time

import numpy as np

from specevo.subspace import decouple, reconstruct
from specevo.wavelet import _haar_np

try:
    from specevo.wavelet import _haar_cy
except ImportError:
    _haar_cy = None


def time_call(fn, *args, repeat=200):
    fn(*args)  # warm-up
    tic = time.perf_counter()
    for _ in range(repeat):
        fn(*args)
    return (time.perf_counter() - tic) / repeat


def bench_kernels():
    print(f"{'case':<28} {'numpy':>12} {'cython':>12} {'speedup':>9}")
    rng = np.random.default_rng(0)
    for n_ch, size in ((1, 64), (4, 64), (4, 128), (4, 256)):
        x = rng.standard_normal((n_ch, size, size))
        bands_np = _haar_np.haar_analyze(x)
        t_np_a = time_call(_haar_np.haar_analyze, x)
        t_np_s = time_call(_haar_np.haar_synthesize, *bands_np)
        if _haar_cy is None:
            print(f"analyze  {n_ch}x{size}x{size:<12} {t_np_a * 1e6:>10.1f}us {'n/a':>12}")
            continue
        t_cy_a = time_call(_haar_cy.haar_analyze, x)
        t_cy_s = time_call(_haar_cy.haar_synthesize, *bands_np)
        print(f"analyze  {n_ch}x{size}x{size:<11} {t_np_a * 1e6:>10.1f}us "
              f"{t_cy_a * 1e6:>10.1f}us {t_np_a / t_cy_a:>8.2f}x")
        print(f"synth    {n_ch}x{size}x{size:<11} {t_np_s * 1e6:>10.1f}us "
              f"{t_cy_s * 1e6:>10.1f}us {t_np_s / t_cy_s:>8.2f}x")


def bench_candidate_path():
    """End-to-end decouple + per-candidate reconstruct at search defaults."""
    import specevo.wavelet as wavelet

    rng = np.random.default_rng(1)
    x = rng.standard_normal((4, 64, 64))
    u, sub = decouple(x, 4)
    t = time_call(reconstruct, u, sub, repeat=500)
    print(f"\nactive backend: {wavelet.BACKEND}")
    print(f"reconstruct (4,64,64) level 4: {t * 1e6:.1f}us per candidate")


if __name__ == "__main__":
    bench_kernels()
    bench_candidate_path()
