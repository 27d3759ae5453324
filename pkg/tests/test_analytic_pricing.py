import logging

import numpy as np
import pytest

from app.models import FactorParams, PricingError, RateCorrelations, SigmaVector, YoyInstrument, ZcInstrument
from app.services.analytic_pricing_service import (
    VOL_LOWER,
    black_price,
    black_price_w_sensitivity,
    implied_vol,
    inflation_linked_bond,
    yoy_cap_floor,
    yoy_forward_ratio,
    yoy_implied_variance,
    yoy_swap,
    zc_cap_floor,
    zc_swap,
)
from app.services.market_data_service import discount

from conftest import P2, deterministic_rates, flat_surface


def _zc(kind="cap", reset=10.0, kbar=0.03, reference=153.93, notional=1.0):
    return ZcInstrument(kind=kind, reset=reset, payment=reset, kbar=kbar, reference=reference, notional=notional)


def _yoy(kind="cap", kbar=0.01, notional=1000.0):
    return YoyInstrument(kind=kind, first_reset=1.0, second_reset=2.0, payment=2.0, kbar=kbar, notional=notional)


# --- Black -----------------------------------------------------------------
def test_black_put_call_parity():
    F, K, w, df = 153.93, 160.0, 0.04**2 * 10.0, 0.7596
    cap = black_price("cap", F, K, w, df, 2.0)
    floor = black_price("floor", F, K, w, df, 2.0)
    assert cap - floor == pytest.approx(2.0 * df * (F - K), abs=1e-12)


def test_black_zero_variance_is_discounted_intrinsic():
    assert black_price("cap", 100.0, 95.0, 0.0, 0.9) == pytest.approx(4.5, abs=1e-14)
    assert black_price("floor", 100.0, 95.0, 0.0, 0.9) == 0.0
    assert black_price("swap", 100.0, 95.0, 0.0, 0.9) == pytest.approx(4.5, abs=1e-14)


def test_black_rejects_unknown_kind():
    with pytest.raises(PricingError):
        black_price("straddle", 100.0, 95.0, 0.01, 0.9)


def test_w_sensitivity_matches_finite_difference():
    F, df, w, h = 136.3, 0.8706, 0.0285**2 * 5.0, 1e-8
    y = np.array([-0.1, 0.0, 0.05])
    K = F * np.exp(y)
    bump = (black_price("cap", F, K, w + h, df) - black_price("cap", F, K, w - h, df)) / (2 * h)
    np.testing.assert_allclose(black_price_w_sensitivity(F, y, w, df), bump, rtol=1e-6)
    floor_bump = (black_price("floor", F, K, w + h, df) - black_price("floor", F, K, w - h, df)) / (2 * h)
    np.testing.assert_allclose(black_price_w_sensitivity(F, y, w, df), floor_bump, rtol=1e-6)


# --- zero-coupon -----------------------------------------------------------
def test_zc_swap_value(curve):
    inst = _zc(kind="swap", reset=5.0, kbar=0.02, reference=136.30, notional=100.0)
    expected = 100.0 * 0.8706 * (136.30 - 136.30 * 1.02**5)
    assert zc_swap(inst, curve, 136.30).value == pytest.approx(expected, rel=1e-13)


def test_inflation_linked_bond(curve):
    assert inflation_linked_bond(curve, 10.0, 153.93, 5.0).value == pytest.approx(5.0 * 0.7596 * 153.93, rel=1e-13)


def test_zc_cap_floor_parity(curve):
    w = 0.035**2 * 10.0
    cap = zc_cap_floor(_zc("cap"), curve, 153.93, w).value
    floor = zc_cap_floor(_zc("floor"), curve, 153.93, w).value
    swap = zc_swap(_zc("swap"), curve, 153.93).value
    assert cap - floor == pytest.approx(swap, abs=1e-12)


@pytest.mark.parametrize("kind,kbar", [("cap", 0.03), ("floor", -0.01), ("cap", -0.02)])
def test_implied_vol_round_trip(curve, kind, kbar):
    inst = _zc(kind=kind, kbar=kbar)
    price = zc_cap_floor(inst, curve, 153.93, 0.0421**2 * 10.0).value
    assert implied_vol(price, inst, curve, 153.93) == pytest.approx(0.0421, rel=1e-9)


def test_implied_vol_band(curve):
    inst = _zc(kind="cap", kbar=-0.02)
    intrinsic = discount(curve, 10.0) * (153.93 - inst.strike_level)
    assert implied_vol(intrinsic, inst, curve, 153.93) == VOL_LOWER
    with pytest.raises(PricingError):
        implied_vol(intrinsic * 0.5, inst, curve, 153.93)
    with pytest.raises(PricingError):
        implied_vol(discount(curve, 10.0) * 153.93, inst, curve, 153.93)
    with pytest.raises(PricingError):
        implied_vol(1.0, _zc(kind="swap"), curve, 153.93)


def test_zc_instrument_validation():
    with pytest.raises(PricingError):
        ZcInstrument(kind="cap", reset=5.0, payment=4.0, kbar=0.0, reference=100.0)
    with pytest.raises(PricingError):
        ZcInstrument(kind="cap", reset=5.0, payment=5.0, kbar=-1.0, reference=100.0)
    assert ZcInstrument(kind=" CAP ", reset=5.0, payment=5.0, kbar=0.0, reference=100.0).kind == "cap"


# --- year-on-year ----------------------------------------------------------
def _yoy_setup(vol=0.02, sigma_values=None):
    surface = flat_surface([1.0, 2.0, 5.0], vol=vol)
    values = sigma_values if sigma_values is not None else [vol] * 3
    sigma = SigmaVector(resets=surface.resets, values=values)
    return surface, sigma


def test_yoy_single_factor_deterministic_rates(curve):
    surface, sigma = _yoy_setup()
    p, rc, g = FactorParams.single(), RateCorrelations(rho=(-0.5,)), deterministic_rates()
    inst = _yoy()
    F1, F2 = surface.forwards[0], surface.forwards[1]

    assert yoy_forward_ratio(inst, curve, surface, sigma, p, rc, g) == pytest.approx(F2 / F1, rel=1e-14)
    assert yoy_implied_variance(inst, curve, surface, sigma, p, rc, g) == pytest.approx(0.02**2, rel=1e-12)
    expected = black_price("cap", F2 / F1, 1.01, 0.02**2, discount(curve, 2.0), 1000.0)
    assert yoy_cap_floor(inst, curve, surface, sigma, p, rc, g).value == pytest.approx(expected, rel=1e-12)


def test_yoy_cap_floor_parity(curve):
    surface, sigma = _yoy_setup()
    rc = RateCorrelations.uniform(-0.5, 2)
    g = deterministic_rates()
    cap = yoy_cap_floor(_yoy("cap"), curve, surface, sigma, P2, rc, g).value
    floor = yoy_cap_floor(_yoy("floor"), curve, surface, sigma, P2, rc, g).value
    swap = yoy_swap(_yoy("swap"), curve, surface, sigma, P2, rc, g).value
    assert cap - floor == pytest.approx(swap, abs=1e-10)


def test_yoy_multi_factor_decorrelation_raises_variance(curve):
    surface, sigma = _yoy_setup()
    g = deterministic_rates()
    single = yoy_implied_variance(_yoy(), curve, surface, sigma, FactorParams.single(), RateCorrelations((0.0,)), g)
    multi = yoy_implied_variance(_yoy(), curve, surface, sigma, P2, RateCorrelations.uniform(0.0, 2), g)
    # A parità di sigma il secondo fattore aggiunge varianza al rapporto F_2/F_1
    assert multi > single


def test_yoy_zero_sigma_prices_intrinsic_with_warning(curve, caplog):
    surface, sigma = _yoy_setup(sigma_values=[0.0, 0.0, 0.0])
    p, rc, g = FactorParams.single(), RateCorrelations(rho=(0.0,)), deterministic_rates()
    F1, F2 = surface.forwards[0], surface.forwards[1]
    with caplog.at_level(logging.WARNING):
        value = yoy_cap_floor(_yoy(kbar=0.0), curve, surface, sigma, p, rc, g).value
    assert value == pytest.approx(1000.0 * discount(curve, 2.0) * max(F2 / F1 - 1.0, 0.0), rel=1e-13)
    assert any(getattr(record, "action", None) == "yoy_degenerate_variance" for record in caplog.records)


def test_yoy_instrument_dates_must_be_ordered():
    with pytest.raises(PricingError):
        YoyInstrument(kind="cap", first_reset=2.0, second_reset=2.0, payment=2.0, kbar=0.0)
    with pytest.raises(PricingError):
        YoyInstrument(kind="cap", first_reset=1.0, second_reset=2.0, payment=1.5, kbar=0.0)
