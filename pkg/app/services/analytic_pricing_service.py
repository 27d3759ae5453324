"""
Pricer analitici: swap, cap e floor zero-coupon e year-on-year nel modello
multi-fattore (M=1 coincide con il caso a singolo fattore), inversione della
volatilità implicita.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq
from scipy.stats import norm

from app.models import (
    CpiVolSurface,
    DiscountCurve,
    FactorParams,
    G1ppParams,
    PriceQuote,
    PricingError,
    RateCorrelations,
    SigmaVector,
    YoyInstrument,
    ZcInstrument,
)
from app.services.factor_service import integrated_sigma_nu_bar, integrated_zeta
from app.services.logging import log_structured_event
from app.services.market_data_service import discount, tenor_index

logger = logging.getLogger(__name__)

VOL_LOWER = 1e-6
VOL_UPPER = 5.0
BAND_TOLERANCE = 1e-12


# ---------------------------------------------------------------------------
# Formula di Black
# ---------------------------------------------------------------------------
def black_price(kind: str, forward: float, strike, w, discount_factor: float, notional: float = 1.0):
    """
    Prezzo Black con varianza totale ``w``:
    d1 = ln(F/K)/sqrt(w) + sqrt(w)/2, d2 = d1 - sqrt(w). Per w <= 0 intrinseco scontato.
    """
    strike = np.asarray(strike, dtype=float)
    w = np.asarray(w, dtype=float)
    scale = notional * discount_factor
    if kind == "swap":
        value = scale * (forward - strike)
    else:
        positive = w > 0.0
        sqrt_w = np.sqrt(np.where(positive, w, 1.0))
        d1 = np.log(forward / strike) / sqrt_w + 0.5 * sqrt_w
        d2 = d1 - sqrt_w
        if kind == "cap":
            black = forward * norm.cdf(d1) - strike * norm.cdf(d2)
            intrinsic = np.maximum(forward - strike, 0.0)
        elif kind == "floor":
            black = strike * norm.cdf(-d2) - forward * norm.cdf(-d1)
            intrinsic = np.maximum(strike - forward, 0.0)
        else:
            raise PricingError(f"Tipo di strumento non supportato: {kind}")
        value = scale * np.where(positive, black, intrinsic)
    return float(value) if np.ndim(value) == 0 else value


def black_price_w_sensitivity(forward: float, y, w, discount_factor: float, notional: float = 1.0):
    """
    dPrice/dw = 1/2 N P F e^y phi(d2) w^{-1/2}, identica per cap e floor
    (d2 = -y/sqrt(w) - sqrt(w)/2).
    """
    y = np.asarray(y, dtype=float)
    sqrt_w = np.sqrt(np.asarray(w, dtype=float))
    d2 = -y / sqrt_w - 0.5 * sqrt_w
    value = 0.5 * notional * discount_factor * forward * np.exp(y) * norm.pdf(d2) / sqrt_w
    return float(value) if np.ndim(value) == 0 else value


# ---------------------------------------------------------------------------
# Zero-coupon
# ---------------------------------------------------------------------------
def zc_swap(inst: ZcInstrument, curve: DiscountCurve, forward: float) -> PriceQuote:
    """N P(0, T~_i) (F_i(0) - K)."""
    value = inst.notional * discount(curve, inst.payment) * (forward - inst.strike_level)
    return PriceQuote(value=value)


def zc_cap_floor(inst: ZcInstrument, curve: DiscountCurve, forward: float, w: float) -> PriceQuote:
    """Cap/floor Black con varianza totale w al reset; swap se ``inst.kind`` è swap."""
    value = black_price(
        inst.kind, forward, inst.strike_level, w, discount(curve, inst.payment), inst.notional
    )
    return PriceQuote(value=value)


def inflation_linked_bond(curve: DiscountCurve, payment: float, forward: float, notional: float = 1.0) -> PriceQuote:
    """Valore del flusso indicizzato N P(0, T~_i) F_i(0)."""
    return PriceQuote(value=notional * discount(curve, payment) * forward)


def implied_vol(price: float, inst: ZcInstrument, curve: DiscountCurve, forward: float) -> float:
    """
    Sigma tale che ``zc_cap_floor`` riproduca ``price`` con w = Sigma^2 T_i.
    Prezzo all'intrinseco scontato -> estremo inferiore dell'intervallo.
    """
    if inst.kind == "swap":
        raise PricingError("La volatilità implicita richiede un cap o un floor")
    scale = inst.notional * discount(curve, inst.payment)
    strike = inst.strike_level
    if inst.kind == "cap":
        lower, upper = scale * max(forward - strike, 0.0), scale * forward
    else:
        lower, upper = scale * max(strike - forward, 0.0), scale * strike
    tolerance = BAND_TOLERANCE * max(1.0, abs(upper))
    if price < lower - tolerance or price >= upper:
        raise PricingError(
            f"Prezzo {price:.10g} fuori dalla banda di non arbitraggio [{lower:.10g}, {upper:.10g})"
        )

    def residual(vol: float) -> float:
        return black_price(inst.kind, forward, strike, vol**2 * inst.reset, 1.0, 1.0) * scale - price

    if residual(VOL_LOWER) >= 0.0:
        return VOL_LOWER
    if residual(VOL_UPPER) < 0.0:
        raise PricingError(f"Volatilità implicita oltre {VOL_UPPER:g}")
    return float(brentq(residual, VOL_LOWER, VOL_UPPER, xtol=1e-15, rtol=4.0 * np.finfo(float).eps, maxiter=500))


# ---------------------------------------------------------------------------
# Year-on-year
# ---------------------------------------------------------------------------
@dataclass(frozen=True)
class YoyTerms:
    """X_ij, varianza totale eta^M_ij e fattore di sconto al pagamento."""

    forward_ratio: float
    variance: float
    discount_factor: float


def yoy_terms(
    inst: YoyInstrument,
    curve: DiscountCurve,
    surface: CpiVolSurface,
    sigma: SigmaVector,
    p: FactorParams,
    rc: RateCorrelations,
    g: G1ppParams,
) -> YoyTerms:
    """
    X_ij = (F_j/F_i) exp[int_0^{T_j} sigma_j nu-bar_j - int_0^{T_i} sigma_i nu-bar_i
            + int_0^{T_i} (sigma_i^2 zeta_ii - sigma_i sigma_j zeta_ij)]
    eta  = sigma_j^2 int_0^{T_j} zeta_jj + sigma_i^2 int_0^{T_i} zeta_ii
           - 2 sigma_i sigma_j int_0^{T_i} zeta_ij
    """
    i = tenor_index(surface, inst.first_reset)
    j = tenor_index(surface, inst.second_reset)
    tenor_i, tenor_j = surface.tenors[i], surface.tenors[j]
    T_i, T_j, T_p = tenor_i.reset, tenor_j.reset, inst.payment
    if not T_i < T_j <= T_p:
        raise PricingError("Date YoY non ordinate: serve T_i < T_j <= T_p")
    s_i, s_j = sigma[i], sigma[j]

    drift_i = integrated_sigma_nu_bar(s_i, p, rc, g, tenor_i.payment, T_i, T_p)
    drift_j = integrated_sigma_nu_bar(s_j, p, rc, g, tenor_j.payment, T_j, T_p)
    z_ii = integrated_zeta(p, T_i, T_i, 0.0, T_i)
    z_jj = integrated_zeta(p, T_j, T_j, 0.0, T_j)
    z_ij = integrated_zeta(p, T_i, T_j, 0.0, T_i)

    convexity = s_i**2 * z_ii - s_i * s_j * z_ij
    ratio = tenor_j.forward / tenor_i.forward * float(np.exp(drift_j - drift_i + convexity))
    variance = s_j**2 * z_jj + s_i**2 * z_ii - 2.0 * s_i * s_j * z_ij
    return YoyTerms(forward_ratio=ratio, variance=variance, discount_factor=discount(curve, T_p))


def yoy_forward_ratio(inst, curve, surface, sigma, p, rc, g) -> float:
    """X_ij = E^{P^{T_p}}[F_j(T_j)/F_i(T_i)]."""
    return yoy_terms(inst, curve, surface, sigma, p, rc, g).forward_ratio


def yoy_implied_variance(inst, curve, surface, sigma, p, rc, g) -> float:
    """eta^M_ij."""
    return yoy_terms(inst, curve, surface, sigma, p, rc, g).variance


def yoy_swap(inst, curve, surface, sigma, p, rc, g) -> PriceQuote:
    """N P(0, T_p) (X_ij - K_Y)."""
    terms = yoy_terms(inst, curve, surface, sigma, p, rc, g)
    return PriceQuote(value=inst.notional * terms.discount_factor * (terms.forward_ratio - inst.strike))


def yoy_cap_floor(inst, curve, surface, sigma, p, rc, g) -> PriceQuote:
    """Black su X_ij con varianza eta^M_ij; eta <= 0 -> intrinseco scontato con warning."""
    terms = yoy_terms(inst, curve, surface, sigma, p, rc, g)
    if inst.kind != "swap" and terms.variance <= 0.0:
        log_structured_event(
            "yoy_degenerate_variance",
            message="Varianza YoY non positiva: prezzo intrinseco",
            level="warning",
            logger_name=__name__,
            variance=terms.variance,
            first_reset=inst.first_reset,
            second_reset=inst.second_reset,
        )
    value = black_price(
        inst.kind, terms.forward_ratio, inst.strike, terms.variance, terms.discount_factor, inst.notional
    )
    return PriceQuote(value=value)
