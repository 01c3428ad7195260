"""Roughness and multifractality of realized log-volatility."""

__version__ = "0.1.0"

from .errors import DataError, NumericError, RoughVolError, ValidationError
from .market_data import (
    PriceGrid,
    ReturnGrid,
    RVSeries,
    TickSeries,
    daily_rv,
    intraday_returns,
    parse_ticks,
    realized_variance,
    resample,
    signature_curve,
)
from .mfdfa import FluctuationTable, HurstCurve, MfdfaConfig, mfdfa_analyze
from .multifractal import (
    ShuffleEnsembleResult,
    SingularitySpectrum,
    format_uncertainty,
    shuffle_ensemble,
    singularity_spectrum,
)
from .structure_function import sf_hurst, sf_moments
from .volseries import (
    IncrementSeries,
    LogVolSeries,
    distribution_summary,
    increments,
    log_vol,
    shuffle,
)
