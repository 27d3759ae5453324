"""
Struttura multi-fattore delle loading: lambda, zeta, correlazioni istantanee,
integrali di varianza, calibrazione dei sigma di Kazziha e drift di cambio misura.
"""

from __future__ import annotations

import logging
from typing import Dict, Mapping

import numpy as np
import pandas as pd

from app.models import (
    CpiVolSurface,
    FactorModelError,
    FactorParams,
    G1ppParams,
    RateCorrelations,
    SigmaVector,
)
from app.services.g1pp_service import b_factor
from app.services.logging import log_structured_event
from app.services.market_data_service import strike_from_moneyness, vol_at
from app.services.quadrature import integrate

logger = logging.getLogger(__name__)

TIME_TOLERANCE = 1e-9


# ---------------------------------------------------------------------------
# Loading e zeta
# ---------------------------------------------------------------------------
def _time_to_reset(T_i: float, t):
    # Oltre il reset le loading restano congelate al valore in t = T_i
    return np.maximum(T_i - np.asarray(t, dtype=float), 0.0)


def loading(p: FactorParams, alpha: int, T_i: float, t):
    """lambda_i^alpha(t); alpha parte da 1."""
    if not 1 <= alpha <= p.M:
        raise FactorModelError(f"Fattore alpha={alpha} fuori da 1..{p.M}")
    tau = _time_to_reset(T_i, t)
    if alpha == 1:
        value = np.ones_like(tau)
    elif alpha == 2:
        h1, h2 = p.h[0], p.h[1]
        value = h1 * np.exp(-p.kappa[0] * tau) + h2
    else:
        h3, h4 = p.h[2], p.h[3]
        value = h3 * tau * np.exp(-p.kappa[1] * tau) + h4
    return float(value) if np.ndim(value) == 0 else value


def loadings(p: FactorParams, T_i: float, t) -> np.ndarray:
    """Vettore (M, ...) di tutte le loading del tenor."""
    return np.array([loading(p, alpha, T_i, t) for alpha in range(1, p.M + 1)], dtype=float)


def zeta(p: FactorParams, T_i: float, T_j: float, t):
    """zeta_ij(t) = sum_alpha lambda_i^alpha lambda_j^alpha."""
    value = np.sum(loadings(p, T_i, t) * loadings(p, T_j, t), axis=0)
    return float(value) if np.ndim(value) == 0 else value


def inst_correlation(p: FactorParams, T_i: float, T_j: float, t):
    """rho^M_ij(t) = zeta_ij / sqrt(zeta_ii zeta_jj)."""
    value = zeta(p, T_i, T_j, t) / np.sqrt(zeta(p, T_i, T_i, t) * zeta(p, T_j, T_j, t))
    value = np.clip(value, -1.0, 1.0)
    return float(value) if np.ndim(value) == 0 else value


# ---------------------------------------------------------------------------
# Integrali di zeta
# ---------------------------------------------------------------------------
def _exp_moment(c: float, n: int, tau: float) -> float:
    """Primitiva di tau^n e^{-c tau} (n = 0, 1, 2) valutata in tau."""
    e = np.exp(-c * tau)
    if n == 0:
        return -e / c
    if n == 1:
        return -e * (tau / c + 1.0 / c**2)
    return -e * (tau**2 / c + 2.0 * tau / c**2 + 2.0 / c**3)


def _moment_integral(c: float, n: int, tau_lo: float, tau_hi: float) -> float:
    return _exp_moment(c, n, tau_hi) - _exp_moment(c, n, tau_lo)


def _diagonal_closed_form(p: FactorParams, T_i: float, t0: float, t1: float) -> float:
    """int_{t0}^{t1} zeta_ii(s) ds in forma chiusa (tau = T_i - s)."""
    tau_lo, tau_hi = T_i - t1, T_i - t0
    span = tau_hi - tau_lo
    if p.M == 1:
        return span
    h1, h2 = p.h[0], p.h[1]
    k1 = p.kappa[0]
    # 1 + (h1 e^{-k1 tau} + h2)^2
    total = (1.0 + h2**2) * span
    total += h1**2 * _moment_integral(2.0 * k1, 0, tau_lo, tau_hi)
    total += 2.0 * h1 * h2 * _moment_integral(k1, 0, tau_lo, tau_hi)
    if p.M == 3:
        h3, h4 = p.h[2], p.h[3]
        k2 = p.kappa[1]
        # (h3 tau e^{-k2 tau} + h4)^2
        total += h4**2 * span
        total += h3**2 * _moment_integral(2.0 * k2, 2, tau_lo, tau_hi)
        total += 2.0 * h3 * h4 * _moment_integral(k2, 1, tau_lo, tau_hi)
    return float(total)


def integrated_zeta(p: FactorParams, T_i: float, T_j: float, t0: float, t1: float) -> float:
    """
    int_{t0}^{t1} zeta_ij(s) ds con t0 <= t1 <= min(T_i, T_j).

    Diagonale in forma chiusa; fuori diagonale quadratura di Gauss–Legendre.
    """
    if t1 < t0 - TIME_TOLERANCE:
        raise FactorModelError("Intervallo di integrazione invertito")
    if t1 > min(T_i, T_j) + TIME_TOLERANCE:
        raise FactorModelError("Intervallo di integrazione oltre il reset")
    if t1 <= t0:
        return 0.0
    if p.M == 1:
        return float(t1 - t0)
    if abs(T_i - T_j) <= TIME_TOLERANCE:
        return _diagonal_closed_form(p, T_i, t0, t1)
    return integrate(lambda s: zeta(p, T_i, T_j, s), t0, t1)


def model_total_variance(sigma_i: float, p: FactorParams, T_i: float, t: float = 0.0) -> float:
    """w^M_i(t) = sigma_i^2 int_t^{T_i} zeta_ii ds."""
    return sigma_i**2 * integrated_zeta(p, T_i, T_i, t, T_i)


# ---------------------------------------------------------------------------
# Calibrazione dei sigma di Kazziha
# ---------------------------------------------------------------------------
def calibrate_sigmas(p: FactorParams, surface: CpiVolSurface, kbar_star: float = 0.0) -> SigmaVector:
    """sigma_i = Sigma_i(K) sqrt(T_i / int_0^{T_i} zeta_ii), K = F_i0 (1 + K̄*)^{T_i}."""
    values = []
    for i, tenor in enumerate(surface.tenors):
        strike = strike_from_moneyness(surface, i, kbar_star)
        market_vol = vol_at(surface, i, strike)
        integrated = integrated_zeta(p, tenor.reset, tenor.reset, 0.0, tenor.reset)
        if integrated <= 0.0:
            raise FactorModelError(f"Varianza integrata non positiva per T={tenor.reset:g}")
        values.append(market_vol * np.sqrt(tenor.reset / integrated))

    sigma = SigmaVector(resets=surface.resets, values=np.array(values))
    log_structured_event(
        "sigma_calibrated",
        message="Parametri sigma calibrati",
        logger_name=__name__,
        factors=p.M,
        kbar_star=kbar_star,
        sigma=sigma.values,
    )
    return sigma


def sigma_table(
    surface: CpiVolSurface,
    params_by_m: Mapping[int, FactorParams],
    kbar_star: float = 0.0,
) -> pd.DataFrame:
    """Tabella per tenor dei sigma per ogni M e dei rapporti sigma^(M)/sigma^(1)."""
    params: Dict[int, FactorParams] = {1: FactorParams.single(), **dict(params_by_m)}
    table = pd.DataFrame({"Ti": surface.resets})
    for m in sorted(params):
        table[f"sigma_M{m}"] = calibrate_sigmas(params[m], surface, kbar_star).values
    for m in sorted(params):
        if m > 1:
            table[f"ratio_M{m}"] = table[f"sigma_M{m}"] / table["sigma_M1"]
    return table


# ---------------------------------------------------------------------------
# Drift di cambio misura
# ---------------------------------------------------------------------------
def _rate_loading(p: FactorParams, rc: RateCorrelations, T_i: float, t):
    if rc.M != p.M:
        raise FactorModelError("Numero di correlazioni tasso/inflazione diverso da M")
    return np.tensordot(rc.as_array(), loadings(p, T_i, t), axes=1)


def nu(p: FactorParams, rc: RateCorrelations, g: G1ppParams, T_tilde_i: float, T_i: float, t):
    """nu^M_i(t) = sigma^r_t b(t, T~_i) sum_alpha rho_alpha lambda_i^alpha(t)."""
    value = g.vol(t) * b_factor(g, t, T_tilde_i) * _rate_loading(p, rc, T_i, t)
    return float(value) if np.ndim(value) == 0 else value


def nu_bar(
    p: FactorParams,
    rc: RateCorrelations,
    g: G1ppParams,
    T_tilde_i: float,
    T_i: float,
    T_p: float,
    t,
):
    """nu-bar^M_i(t) = sigma^r_t (b(t, T~_i) - b(t, T_p)) sum_alpha rho_alpha lambda_i^alpha(t)."""
    spread = b_factor(g, t, T_tilde_i) - b_factor(g, t, T_p)
    value = g.vol(t) * spread * _rate_loading(p, rc, T_i, t)
    return float(value) if np.ndim(value) == 0 else value


def integrated_sigma_nu_bar(
    sigma_i: float,
    p: FactorParams,
    rc: RateCorrelations,
    g: G1ppParams,
    T_tilde_i: float,
    T_i: float,
    T_p: float,
) -> float:
    """int_0^{T_i} sigma_i nu-bar_i ds."""
    if g.is_deterministic or abs(T_tilde_i - T_p) <= TIME_TOLERANCE:
        return 0.0
    return sigma_i * integrate(
        lambda s: nu_bar(p, rc, g, T_tilde_i, T_i, T_p, s), 0.0, T_i, g.breakpoints(0.0, T_i)
    )


def forward_expectation(
    forward0: float,
    sigma_i: float,
    p: FactorParams,
    rc: RateCorrelations,
    g: G1ppParams,
    T_tilde_i: float,
    T_i: float,
    T_p: float,
) -> float:
    """E^{P^{T_p}}[F_i(T_i)] = F_i0 exp(int_0^{T_i} sigma_i nu-bar_i ds)."""
    return forward0 * float(np.exp(integrated_sigma_nu_bar(sigma_i, p, rc, g, T_tilde_i, T_i, T_p)))
