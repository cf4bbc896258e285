"""Spectral evolution search toolkit.

Wavelet-based low-frequency search coordinates, cross-entropy optimization
of initial noise, budget-matched baselines, and an analytically solvable
Wiener-flow generator for verifying the spectral scaling of perturbation
gains.
"""

__version__ = "0.1.0"
