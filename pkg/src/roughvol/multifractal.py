"""Singularity spectrum, multifractality width measures and shuffle ensembles."""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from decimal import ROUND_HALF_UP, Decimal

import numpy as np

from .errors import RoughVolError, ValidationError
from .mfdfa import HurstCurve, MfdfaConfig, mfdfa_analyze
from .volseries import IncrementSeries, shuffle


@dataclass
class SingularitySpectrum:
    q: np.ndarray
    alpha: np.ndarray
    f_alpha: np.ndarray
    delta_alpha: float
    delta_h: float


@dataclass
class ShuffleEnsembleResult:
    n_replicates: int
    q: np.ndarray
    mean_h: np.ndarray
    std_h: np.ndarray
    delta_h_mean: float
    delta_h_std: float
    delta_alpha_mean: float
    delta_alpha_std: float
    seeds: list[int] = field(default_factory=list)
    h: np.ndarray | None = None  # (n_replicates, n_q), per-replicate curves


def singularity_spectrum(curve: HurstCurve) -> SingularitySpectrum:
    """α = h + q h'(q), f(α) = q (α - h) + 1 on a uniform q grid.

    h' uses central differences inside the grid and one-sided differences at
    the two ends. Δh = h(q_min) - h(q_max), Δα = max α - min α.
    """
    q = np.asarray(curve.q, dtype=float)
    h = np.asarray(curve.h, dtype=float)
    if q.size < 3:
        raise ValidationError("need at least 3 q values for a singularity spectrum")
    steps = np.diff(q)
    if np.any(steps <= 0) or not np.allclose(steps, steps[0], rtol=1e-9, atol=1e-12):
        raise ValidationError("singularity spectrum needs a uniform, increasing q grid; resample first")
    dh = np.gradient(h, q, edge_order=1)
    alpha = h + q * dh
    f = q * (alpha - h) + 1.0
    return SingularitySpectrum(
        q=q.copy(),
        alpha=alpha,
        f_alpha=f,
        delta_alpha=float(alpha.max() - alpha.min()),
        delta_h=float(h[0] - h[-1]),
    )


def default_workers() -> int:
    """Thread count from ROUGHVOL_THREADS (0 or unset means one per CPU)."""
    try:
        n = int(os.environ.get("ROUGHVOL_THREADS", "0"))
    except ValueError:
        n = 0
    return n if n > 0 else (os.cpu_count() or 1)


def shuffle_ensemble(
    inc: IncrementSeries,
    cfg: MfdfaConfig | None = None,
    n_replicates: int = 20,
    base_seed: int = 0,
    seeds: list[int] | None = None,
    workers: int | None = None,
) -> ShuffleEnsembleResult:
    """MF-DFA of `n_replicates` shuffled copies; replicate i uses seed base_seed + i.

    `seeds` overrides the per-replicate seeds. Per-q std is the sample (ddof=1)
    standard deviation across replicates; Δh and Δα are computed per replicate
    and then averaged.
    """
    cfg = cfg or MfdfaConfig()
    if n_replicates < 2:
        raise ValidationError("need at least 2 replicates to estimate a spread")
    if seeds is None:
        seeds = [base_seed + i for i in range(n_replicates)]
    elif len(seeds) != n_replicates:
        raise ValidationError("seeds must have one entry per replicate")

    def run(seed):
        try:
            _, curve = mfdfa_analyze(shuffle(inc, seed).values, cfg)
            return curve, singularity_spectrum(curve)
        except RoughVolError as exc:
            raise type(exc)(f"replicate with seed {seed} failed: {exc}") from exc

    with ThreadPoolExecutor(max_workers=workers or default_workers()) as pool:
        results = list(pool.map(run, seeds))

    h = np.array([c.h for c, _ in results])
    dh = np.array([s.delta_h for _, s in results])
    da = np.array([s.delta_alpha for _, s in results])
    return ShuffleEnsembleResult(
        n_replicates=n_replicates,
        q=results[0][0].q.copy(),
        mean_h=h.mean(axis=0),
        std_h=h.std(axis=0, ddof=1),
        delta_h_mean=float(dh.mean()),
        delta_h_std=float(dh.std(ddof=1)),
        delta_alpha_mean=float(da.mean()),
        delta_alpha_std=float(da.std(ddof=1)),
        seeds=list(seeds),
        h=h,
    )


def format_uncertainty(value: float, std: float) -> str:
    """Render value(std) with three decimals, std in units of the last digit: 0.515(21)."""
    if std < 0:
        raise ValidationError("std must be non-negative")
    v = Decimal(repr(float(value))).quantize(Decimal("0.001"), rounding=ROUND_HALF_UP)
    u = (Decimal(repr(float(std))) * 1000).quantize(Decimal("1"), rounding=ROUND_HALF_UP)
    return f"{v}({u})"
