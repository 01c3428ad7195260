"""Synthetic processes with known scaling exponents.

These serve as oracles for the estimators: fractional Gaussian noise has
h(q) = H for every q, and the deterministic binomial cascade has a
closed-form, strictly q-dependent h(q).
"""

from __future__ import annotations

import logging
import math

import numpy as np

from .errors import ValidationError

logger = logging.getLogger(__name__)

MAX_CASCADE_LEVELS = 26


def fgn_autocovariance(H: float, n: int) -> np.ndarray:
    """Unit-variance fGn autocovariance at lags 0..n-1."""
    k = np.arange(n, dtype=float)
    two_h = 2.0 * H
    return 0.5 * (np.abs(k + 1) ** two_h - 2.0 * k**two_h + np.abs(k - 1) ** two_h)


def fbm_increments(H: float, n: int, seed: int) -> np.ndarray:
    """Exact fractional Gaussian noise by circulant embedding (Davies-Harte).

    The autocovariance is embedded in a circulant matrix of size 2n whose
    eigenvalues come from one real FFT. Negative eigenvalues (not expected
    for fGn, but guarded against) are clipped to zero, which makes the
    covariance approximate; a warning is logged when that happens.

    The generator is ``numpy.random.Generator(PCG64(seed))``.
    """
    if not 0.0 < H < 1.0:
        raise ValidationError(f"Hurst parameter must lie in (0, 1), got {H}")
    if n < 2 or n & (n - 1):
        raise ValidationError(f"n must be a power of two >= 2, got {n}")

    gamma = fgn_autocovariance(H, n + 1)
    # first row of the 2n circulant: g0..gn, g(n-1)..g1
    row = np.concatenate([gamma, gamma[-2:0:-1]])
    eig = np.fft.fft(row).real
    if eig.min() < 0.0:
        tol = 1e-10 * eig.max()
        if eig.min() < -tol:
            logger.warning(
                "circulant embedding not non-negative definite (min eigenvalue %.3g); "
                "clipping, covariance is now approximate",
                eig.min(),
            )
        eig = np.clip(eig, 0.0, None)

    m = row.size
    rng = np.random.Generator(np.random.PCG64(seed))
    z = rng.standard_normal(m) + 1j * rng.standard_normal(m)
    w = np.fft.fft(np.sqrt(eig / m) * z)
    return w.real[:n].copy()


def fbm_path(H: float, n: int, seed: int) -> np.ndarray:
    """Fractional Brownian motion sampled at 0..n (starts at 0)."""
    return np.concatenate([[0.0], np.cumsum(fbm_increments(H, n, seed))])


def gaussian_white(n: int, seed: int) -> np.ndarray:
    if n < 1:
        raise ValidationError(f"n must be positive, got {n}")
    rng = np.random.Generator(np.random.PCG64(seed))
    return rng.standard_normal(n)


def binomial_cascade(a: float, levels: int) -> np.ndarray:
    """Deterministic binomial measure with multipliers (a, 1 - a).

    Each level replaces every weight w by the pair (w*a, w*(1-a)), so the
    result has 2**levels entries summing to one.
    """
    if not 0.0 < a < 1.0:
        raise ValidationError(f"cascade multiplier must lie in (0, 1), got {a}")
    if levels < 0 or levels > MAX_CASCADE_LEVELS:
        raise ValidationError(f"levels must lie in [0, {MAX_CASCADE_LEVELS}], got {levels}")
    w = np.ones(1)
    pair = np.array([a, 1.0 - a])
    for _ in range(levels):
        w = np.outer(w, pair).ravel()
    return w


def cascade_hurst_analytic(a: float, q: float) -> float:
    """Closed-form h(q) of the binomial cascade under fluctuation analysis.

    h(q) = 1/q - ln(a**q + (1-a)**q) / (q ln 2); at q = 0 the limit
    -(ln a + ln(1-a)) / (2 ln 2) is returned.
    """
    if not 0.0 < a < 1.0:
        raise ValidationError(f"cascade multiplier must lie in (0, 1), got {a}")
    b = 1.0 - a
    if q == 0.0:
        return -(math.log(a) + math.log(b)) / (2.0 * math.log(2.0))
    # logaddexp keeps a**q + b**q finite for large |q|
    log_sum = np.logaddexp(q * math.log(a), q * math.log(b))
    return float(1.0 / q - log_sum / (q * math.log(2.0)))


def cascade_singularity_bounds(a: float) -> tuple[float, float]:
    """(alpha_min, alpha_max) of the binomial cascade spectrum."""
    lo, hi = sorted((-math.log2(max(a, 1.0 - a)), -math.log2(min(a, 1.0 - a))))
    return lo, hi
