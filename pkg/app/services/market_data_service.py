"""
Servizio dati di mercato: interpolazione della curva di sconto, smile CPI e
superficie di varianza totale implicita con le derivate richieste da Dupire.
"""

from __future__ import annotations

import logging
from typing import Tuple

import numpy as np

from app.models import (
    CpiVolSurface,
    DiscountCurve,
    ExtrapolationError,
    MarketDataError,
    TotalVarianceSurface,
)
from app.parsers.market_data_parser import load_g1pp, load_market  # noqa: F401

logger = logging.getLogger(__name__)

TIME_TOLERANCE = 1e-9


# ---------------------------------------------------------------------------
# Curva di sconto
# ---------------------------------------------------------------------------
def _check_curve_range(curve: DiscountCurve, T) -> np.ndarray:
    T = np.asarray(T, dtype=float)
    if np.any(T < 0.0):
        raise ExtrapolationError("Scadenza negativa sulla curva di sconto")
    if np.any(T > curve.last_time + TIME_TOLERANCE):
        raise ExtrapolationError(
            f"Scadenza oltre l'ultimo pilastro della curva ({curve.last_time:g})"
        )
    return T


def discount(curve: DiscountCurve, T):
    """P(0, T) con interpolazione log-lineare; esatto sui pilastri."""
    T = _check_curve_range(curve, T)
    value = np.exp(np.interp(T, curve.times, curve.log_discounts))
    return float(value) if value.ndim == 0 else value


def instantaneous_forward(curve: DiscountCurve, T):
    """
    f(0, T) = -d log P / dT, costante a tratti e continua a destra sui pilastri.
    All'ultimo pilastro vale il forward dell'ultimo intervallo.
    """
    T = _check_curve_range(curve, T)
    idx = np.searchsorted(curve.times, T, side="right")
    idx = np.clip(idx, 1, curve.times.size - 1)
    log_df = curve.log_discounts
    rate = -(log_df[idx] - log_df[idx - 1]) / (curve.times[idx] - curve.times[idx - 1])
    return float(rate) if np.ndim(rate) == 0 else rate


# ---------------------------------------------------------------------------
# Superficie di volatilità
# ---------------------------------------------------------------------------
def _check_tenor(surface: CpiVolSurface, i: int) -> None:
    if not 0 <= int(i) < len(surface):
        raise MarketDataError(f"Tenor sconosciuto: indice {i}")


def tenor_index(surface: CpiVolSurface, T: float) -> int:
    """Indice del tenor con reset T (tolleranza 1e-9)."""
    hits = np.flatnonzero(np.abs(surface.resets - float(T)) <= TIME_TOLERANCE)
    if hits.size == 0:
        raise MarketDataError(f"Tenor sconosciuto: T={T:g}")
    return int(hits[0])


def strike_from_moneyness(surface: CpiVolSurface, i: int, kbar):
    """K = F_i0 (1 + K̄)^T_i."""
    _check_tenor(surface, i)
    tenor = surface.tenors[i]
    return tenor.forward * (1.0 + np.asarray(kbar, dtype=float)) ** tenor.reset


def log_moneyness(surface: CpiVolSurface, i: int, kbar):
    """y = T_i log(1 + K̄) = log(K / F_i0)."""
    _check_tenor(surface, i)
    return surface.tenors[i].reset * np.log1p(np.asarray(kbar, dtype=float))


def vol_at(surface: CpiVolSurface, i: int, K):
    """Sigma_i(K): esatto sulle quote, piatto oltre gli strike quotati."""
    _check_tenor(surface, i)
    value = surface.smiles[i](K)
    return float(value) if np.ndim(value) == 0 else value


def vol_slope(surface: CpiVolSurface, i: int, K):
    """dSigma_i/dK dall'interpolante (zero fuori dalle quote)."""
    _check_tenor(surface, i)
    value = surface.smiles[i](K, 1)
    return float(value) if np.ndim(value) == 0 else value


# ---------------------------------------------------------------------------
# Varianza totale implicita
# ---------------------------------------------------------------------------
def total_variance(
    tiv: TotalVarianceSurface, i: int, y, T: float
) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """
    (w, dw/dT, dw/dy, d2w/dy2) con w_i(y, T) = Sigma_i(F_i0 e^y)^2 T.

    Le derivate in y vengono dall'interpolante in strike per regola della catena
    (K = F_i0 e^y): dSigma/dy = K Sigma'(K), d2Sigma/dy2 = K^2 Sigma''(K) + K Sigma'(K).
    """
    surface = tiv.surface
    _check_tenor(surface, i)
    tenor = surface.tenors[i]
    if T <= 0.0:
        raise MarketDataError("La varianza totale richiede T > 0")
    if T > tenor.reset + tiv.reset_tolerance:
        raise ExtrapolationError(
            f"T={T:g} oltre la scadenza quotata del tenor ({tenor.reset:g})"
        )

    smile = surface.smiles[i]
    y = np.asarray(y, dtype=float)
    strike = tenor.forward * np.exp(y)
    sigma = smile(strike)
    d_sigma = smile(strike, 1) * strike
    d2_sigma = smile(strike, 2) * strike**2 + d_sigma

    w = sigma**2 * T
    w_t = sigma**2
    w_y = 2.0 * sigma * d_sigma * T
    w_yy = 2.0 * (d_sigma**2 + sigma * d2_sigma) * T
    return w, w_t, w_y, w_yy
