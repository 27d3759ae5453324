"""
Pacchetto dei modelli di dominio (immutabili, validati alla costruzione).

Qui vengono esportate le classi modello principali.
"""

from .errors import (
    CorrelationDataError,
    ExtrapolationError,
    FactorModelError,
    G1ppError,
    InvalidCorrelationError,
    LeverageCalibrationError,
    MarketDataError,
    PricingError,
    SimulationError,
)
from .curve import DiscountCurve
from .vol_surface import DEFAULT_SMILE_METHOD, SMILE_METHODS, CpiTenor, CpiVolSurface, Smile, TotalVarianceSurface
from .history import HistoricalSeries
from .g1pp import G1ppParams, PiecewiseConstant, ShiftFunction
from .factor_params import FactorParams, RateCorrelations, SigmaVector, SimplifiedParams
from .correlation import CorrelationMatrix, PcaResult
from .instruments import PriceQuote, YoyInstrument, ZcInstrument
from .mc_config import McConfig, build_slice_grid
from .leverage_surface import LeverageSurface, ThetaEstimate, kbar_grid

__all__ = [
    "CorrelationDataError",
    "ExtrapolationError",
    "FactorModelError",
    "G1ppError",
    "InvalidCorrelationError",
    "LeverageCalibrationError",
    "MarketDataError",
    "PricingError",
    "SimulationError",
    "DiscountCurve",
    "CpiTenor",
    "CpiVolSurface",
    "Smile",
    "DEFAULT_SMILE_METHOD",
    "SMILE_METHODS",
    "TotalVarianceSurface",
    "HistoricalSeries",
    "G1ppParams",
    "PiecewiseConstant",
    "ShiftFunction",
    "FactorParams",
    "RateCorrelations",
    "SigmaVector",
    "SimplifiedParams",
    "CorrelationMatrix",
    "PcaResult",
    "PriceQuote",
    "YoyInstrument",
    "ZcInstrument",
    "McConfig",
    "build_slice_grid",
    "LeverageSurface",
    "ThetaEstimate",
    "kbar_grid",
]
