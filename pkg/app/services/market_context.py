"""
Contesto di mercato di un'esecuzione.

Carica gli input una sola volta e costruisce su richiesta gli oggetti calibrati
(shift G1++, sigma, superficie di varianza, leverage), con lo stesso schema a
proprietà lazy dell'accesso ai repository.
"""

from __future__ import annotations

import logging
from typing import Optional

import numpy as np

from app.models import (
    CpiVolSurface,
    DiscountCurve,
    FactorParams,
    G1ppParams,
    HistoricalSeries,
    LeverageSurface,
    MarketDataError,
    McConfig,
    RateCorrelations,
    ShiftFunction,
    SigmaVector,
    SimplifiedParams,
    TotalVarianceSurface,
)
from app.parsers.leverage_parser import load_leverage_surface
from app.services.dto import RunConfig
from app.services.factor_service import calibrate_sigmas
from app.services.g1pp_service import calibrate_shift
from app.services.leverage_service import LeverageProvider, calibrate_all
from app.services.market_data_service import load_g1pp, load_market
from app.services.montecarlo_service import ConstantSigmaProvider, DiffusionProvider, SimulationModel
from app.services.simplified_service import SimplifiedProvider

logger = logging.getLogger(__name__)


class MarketContext:
    def __init__(self, run: RunConfig):
        self.run = run
        self._curve: Optional[DiscountCurve] = None
        self._surface: Optional[CpiVolSurface] = None
        self._history: Optional[HistoricalSeries] = None
        self._g1pp: Optional[G1ppParams] = None
        self._shift: Optional[ShiftFunction] = None
        self._sigma: Optional[SigmaVector] = None
        self._leverage: Optional[LeverageSurface] = None

    def __enter__(self):
        return self

    def __exit__(self, exc_type, exc_val, exc_tb):
        if exc_type:
            logger.debug("Contesto di mercato chiuso con errore", extra={"error": str(exc_val)})
        return False

    # --- input di mercato -----------------------------------------------------
    def _load_market(self) -> None:
        self._curve, self._surface, self._history = load_market(
            self.run.discounts,
            self.run.vols,
            self.run.history,
            interpolation=self.run.interpolation,
            reference_index=self.run.reference_index,
        )

    @property
    def curve(self) -> DiscountCurve:
        if self._curve is None:
            self._load_market()
        return self._curve

    @property
    def surface(self) -> CpiVolSurface:
        if self._surface is None:
            self._load_market()
        return self._surface

    @property
    def history(self) -> HistoricalSeries:
        if self._curve is None:
            self._load_market()
        if self._history is None:
            raise FileNotFoundError("Serie storica non configurata (inputs.history)")
        return self._history

    # --- modello dei tassi ----------------------------------------------------
    @property
    def g1pp(self) -> G1ppParams:
        if self._g1pp is None:
            self._g1pp = load_g1pp(self.run.g1pp, self.run.mean_reversion)
        return self._g1pp

    @property
    def shift(self) -> ShiftFunction:
        if self._shift is None:
            self._shift = calibrate_shift(self.g1pp, self.curve)
        return self._shift

    # --- struttura a fattori --------------------------------------------------
    @property
    def factors(self) -> FactorParams:
        return FactorParams(M=self.run.M, h=self.run.h, kappa=self.run.kappa)

    @property
    def rates(self) -> RateCorrelations:
        return RateCorrelations(rho=self.run.rho)

    @property
    def sigma(self) -> SigmaVector:
        if self._sigma is None:
            self._sigma = calibrate_sigmas(self.factors, self.surface, self.run.kbar_star)
        return self._sigma

    @property
    def total_variance(self) -> TotalVarianceSurface:
        return TotalVarianceSurface(self.surface)

    @property
    def simplified(self) -> SimplifiedParams:
        return SimplifiedParams(eta=self.run.eta)

    @property
    def simulation_model(self) -> SimulationModel:
        return SimulationModel(
            curve=self.curve,
            g1pp=self.g1pp,
            shift=self.shift,
            factors=self.factors,
            rates=self.rates,
            surface=self.surface,
        )

    def mc_config(self, n_paths: Optional[int] = None) -> McConfig:
        settings = self.run.monte_carlo
        return McConfig.build(
            n_paths=n_paths or settings.paths,
            seed=settings.seed,
            fixings=self.surface.resets,
            slice_dt=settings.slice_dt,
            substeps=settings.substeps,
            antithetic=settings.antithetic,
            block_size=settings.block_size,
            workers=settings.workers,
        )

    # --- leverage -------------------------------------------------------------
    @property
    def leverage(self) -> LeverageSurface:
        """Superficie da file se configurata, altrimenti calibrata al primo accesso."""
        if self._leverage is None:
            if self.run.leverage is not None:
                surface = load_leverage_surface(self.run.leverage)
                if surface.resets.shape != self.surface.resets.shape or np.any(
                    np.abs(surface.resets - self.surface.resets) > 1e-9
                ):
                    raise MarketDataError("I tenor della leverage non coincidono con la superficie di volatilità")
                self._leverage = surface
            else:
                logger.info("Leverage non fornita: calibrazione in corso")
                self._leverage = calibrate_all(self.simulation_model, self.total_variance, self.mc_config()).surface
        return self._leverage

    def use_leverage(self, surface: LeverageSurface) -> None:
        self._leverage = surface

    def provider(self, model: Optional[str] = None) -> DiffusionProvider:
        """Coefficiente di diffusione del modello scelto (constant, leveraged, simplified)."""
        choice = model or self.run.model
        if choice == "leveraged":
            return LeverageProvider(self.leverage, self.simulation_model.log_forwards0)
        if choice == "simplified":
            return SimplifiedProvider(self.surface, self.factors, self.simplified)
        return ConstantSigmaProvider(self.sigma)
