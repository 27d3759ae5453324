"""
Modello semplificato senza calibrazione: coefficiente di diffusione
Lambda_i = q_i(F) / sqrt(zeta_ii(t)) con cap algoritmico eta.
"""

from __future__ import annotations

import numpy as np

from app.models import CpiVolSurface, FactorParams, SimplifiedParams
from app.services.factor_service import zeta
from app.services.market_data_service import vol_at, vol_slope


def q_of_strike(i: int, K, surface: CpiVolSurface, sp: SimplifiedParams):
    """q_i(K) = Sigma_i(K) / max(1/eta, 1 - K ln(K/F_i0) Sigma_i'(K) / Sigma_i(K))."""
    K = np.asarray(K, dtype=float)
    forward = surface.tenors[i].forward
    sigma = vol_at(surface, i, K)
    slope = vol_slope(surface, i, K)
    denominator = 1.0 - K * np.log(K / forward) * slope / sigma
    value = sigma / np.maximum(1.0 / sp.eta, denominator)
    return float(value) if np.ndim(value) == 0 else value


def coefficient(i: int, F, t: float, p: FactorParams, surface: CpiVolSurface, sp: SimplifiedParams):
    """Lambda_i(F, t) = q_i(F) / sqrt(zeta_ii(t)); le loading sono congelate dopo il reset."""
    reset = surface.tenors[i].reset
    return q_of_strike(i, F, surface, sp) / np.sqrt(zeta(p, reset, reset, t))


class SimplifiedProvider:
    """Provider per il motore MC: sostituisce L_i con Lambda_i nella SDE risk-neutral."""

    def __init__(self, surface: CpiVolSurface, p: FactorParams, sp: SimplifiedParams):
        self.surface = surface
        self.factors = p
        self.params = sp

    def coefficient(self, i: int, log_forward: np.ndarray, t: float) -> np.ndarray:
        return np.asarray(
            coefficient(i, np.exp(log_forward), t, self.factors, self.surface, self.params),
            dtype=float,
        )
