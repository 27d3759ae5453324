"""
Servizio G1++: b-factor, calibrazione della shift function sulla curva,
prezzi zero-coupon a stati futuri e bond ausiliario P^z.

Convenzioni:
- a_t e sigma^r_t costanti a tratti (``PiecewiseConstant``), piatti oltre l'ultimo nodo
- A(t) = int_0^t a, G(t) = int_0^t e^{-A}: entrambi in forma chiusa per tratti
- b(t, T) = e^{A(t)} (G(T) - G(t))
"""

from __future__ import annotations

import logging
from typing import Tuple

import numpy as np

from app.models import DiscountCurve, ExtrapolationError, G1ppError, G1ppParams, ShiftFunction
from app.models.g1pp import PiecewiseConstant
from app.services.logging import log_structured_event
from app.services.quadrature import integrate

logger = logging.getLogger(__name__)

TIME_TOLERANCE = 1e-12


def _exp_integral_piece(rate, width):
    """int_0^width e^{-rate s} ds, stabile per rate -> 0."""
    rate = np.asarray(rate, dtype=float)
    safe = np.where(rate > 0.0, rate, 1.0)
    return np.where(rate > 0.0, -np.expm1(-rate * width) / safe, width)


def _discount_integral(a: PiecewiseConstant, t):
    """G(t) = int_0^t exp(-A(s)) ds."""
    t = np.asarray(t, dtype=float)
    lefts = np.concatenate([[0.0], a.times[:-1]])
    widths = np.diff(np.concatenate([lefts, [a.times[-1]]]))
    a_left = a.antiderivative(lefts)
    pieces = np.exp(-a_left) * _exp_integral_piece(a.values, widths)
    g_left = np.concatenate([[0.0], np.cumsum(pieces)[:-1]])

    idx = np.minimum(np.searchsorted(a.times, t, side="left"), a.values.size - 1)
    partial = _exp_integral_piece(a.values[idx], t - lefts[idx])
    return g_left[idx] + np.exp(-a_left[idx]) * partial


def _check_order(t, T) -> None:
    if np.any(np.asarray(t, dtype=float) > np.asarray(T, dtype=float) + TIME_TOLERANCE):
        raise G1ppError("Richiesto t > T")


def b_factor(params: G1ppParams, t, T):
    """b(t, T) = int_t^T exp(-int_t^v a) dv; vettoriale in t e T."""
    _check_order(t, T)
    a = params.mean_reversion
    value = np.exp(a.antiderivative(t)) * (_discount_integral(a, T) - _discount_integral(a, t))
    value = np.maximum(value, 0.0)
    return float(value) if np.ndim(value) == 0 else value


def ou_transition(params: G1ppParams, t: float, t_next: float) -> Tuple[float, float]:
    """
    Transizione esatta di x da t a t': x' = m x + sqrt(v) Z, con
    m = exp(-int_t^t' a) e v = int_t^t' sigma_s^2 exp(-2 int_s^t' a) ds.
    """
    _check_order(t, t_next)
    a = params.mean_reversion
    a_end = float(a.antiderivative(t_next))
    mean_factor = float(np.exp(-(a_end - a.antiderivative(t))))

    def integrand(s):
        return params.vol(s) ** 2 * np.exp(-2.0 * (a_end - a.antiderivative(s)))

    variance = integrate(integrand, t, t_next, params.breakpoints(t, t_next))
    return mean_factor, variance


def _convexity(params: G1ppParams, t: float, T: float) -> float:
    """1/2 int_t^T (b(s, T) sigma^r_s)^2 ds."""
    if params.is_deterministic or T <= t:
        return 0.0

    def integrand(s):
        return (b_factor(params, s, T) * params.vol(s)) ** 2

    return 0.5 * integrate(integrand, t, T, params.breakpoints(t, T))


def pz_bond(params: G1ppParams, t: float, x_t, T: float):
    """P^z(t, T) = exp[1/2 int (b sigma^r)^2 - b(t, T) x_t]."""
    _check_order(t, T)
    value = np.exp(_convexity(params, t, T) - b_factor(params, t, T) * np.asarray(x_t, dtype=float))
    return float(value) if np.ndim(value) == 0 else value


def integrated_shift(shift: ShiftFunction, t0: float, t1: float) -> float:
    """int_{t0}^{t1} phi_s ds, esatto per phi costante a tratti."""
    return float(shift.function.integral(t0, t1))


def shift_value(shift: ShiftFunction, t):
    """phi(t) continua a destra sui pilastri, coerente con ``instantaneous_forward``."""
    fn = shift.function
    idx = np.minimum(np.searchsorted(fn.times, np.asarray(t, dtype=float), side="right"), fn.values.size - 1)
    return fn.values[idx]


def short_rate(shift: ShiftFunction, t: float, x_t):
    """r_t = x_t + phi(t)."""
    return np.asarray(x_t, dtype=float) + shift_value(shift, t)


def zcb_price(params: G1ppParams, shift: ShiftFunction, t: float, x_t, T: float):
    """P(t, T) = exp[-int_t^T (phi_s - 1/2 (b(s, T) sigma^r_s)^2) ds - b(t, T) x_t]."""
    _check_order(t, T)
    if T > shift.last_time + 1e-9:
        raise ExtrapolationError(f"Scadenza T={T:g} oltre l'ultimo pilastro della shift function")
    log_price = -integrated_shift(shift, t, T) + _convexity(params, t, T)
    value = np.exp(log_price - b_factor(params, t, T) * np.asarray(x_t, dtype=float))
    return float(value) if np.ndim(value) == 0 else value


def forward_measure_drift(params: G1ppParams, t: float, x_t, T: float):
    """Drift di x sotto la misura T-forward: -a_t x_t - b(t, T) (sigma^r_t)^2."""
    _check_order(t, T)
    a_t = params.mean_reversion(t)
    sigma_t = params.vol(t)
    return -a_t * np.asarray(x_t, dtype=float) - b_factor(params, t, T) * sigma_t**2


def calibrate_shift(params: G1ppParams, curve: DiscountCurve) -> ShiftFunction:
    """
    phi_n = log[P^z(0,T_n) P(0,T_{n-1}) / (P^z(0,T_{n-1}) P(0,T_n))] / (T_n - T_{n-1})
    su ogni intervallo di pilastri.
    """
    times = curve.times
    if times.size < 2:
        raise G1ppError("La curva richiede almeno due pilastri")
    widths = np.diff(times)
    if np.any(widths <= 0.0):
        raise G1ppError("Intervallo di pilastri degenere")

    log_pz = np.array([_convexity(params, 0.0, T) for T in times])
    log_p = curve.log_discounts
    values = (np.diff(log_pz) - np.diff(log_p)) / widths

    log_structured_event(
        "g1pp_shift_calibrated",
        message="Shift function G1++ calibrata",
        logger_name=__name__,
        pillars=int(times.size),
        deterministic=params.is_deterministic,
    )
    return ShiftFunction(pillars=times, values=values)
