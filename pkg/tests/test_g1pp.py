import numpy as np
import pytest

from app.models import DiscountCurve, ExtrapolationError, G1ppError, G1ppParams, PiecewiseConstant
from app.services.g1pp_service import (
    b_factor,
    calibrate_shift,
    forward_measure_drift,
    ou_transition,
    pz_bond,
    shift_value,
    zcb_price,
)
from app.services.market_data_service import discount, instantaneous_forward


def test_b_factor_constant_mean_reversion():
    params = G1ppParams.constant(0.03, 0.01)
    expected = (1.0 - np.exp(-0.03 * 4.5)) / 0.03
    assert b_factor(params, 0.5, 5.0) == pytest.approx(expected, rel=1e-13)
    assert b_factor(params, 2.0, 2.0) == 0.0


def test_b_factor_zero_mean_reversion_is_time_to_maturity():
    params = G1ppParams.constant(0.0, 0.01)
    assert b_factor(params, 1.0, 7.5) == pytest.approx(6.5, rel=1e-14)


def test_b_factor_piecewise_mean_reversion():
    a = PiecewiseConstant(times=[2.0, 10.0], values=[0.01, 0.05])
    params = G1ppParams(a, PiecewiseConstant.constant(0.01))
    # int_1^4 exp(-int_1^v a) dv, a = 0.01 fino a 2 e 0.05 dopo
    first = (1.0 - np.exp(-0.01)) / 0.01
    second = np.exp(-0.01) * (1.0 - np.exp(-0.05 * 2.0)) / 0.05
    assert b_factor(params, 1.0, 4.0) == pytest.approx(first + second, rel=1e-13)


def test_b_factor_rejects_reversed_times():
    with pytest.raises(G1ppError):
        b_factor(G1ppParams.constant(0.02, 0.01), 3.0, 2.0)


def test_ou_transition_matches_closed_form():
    a, sigma = 0.02, 0.011
    mean_factor, variance = ou_transition(G1ppParams.constant(a, sigma), 1.0, 1.25)
    assert mean_factor == pytest.approx(np.exp(-a * 0.25), rel=1e-14)
    assert variance == pytest.approx(sigma**2 * (1.0 - np.exp(-2 * a * 0.25)) / (2 * a), rel=1e-12)


def test_shift_reproduces_discount_curve_on_pillars(curve, g1pp):
    shift = calibrate_shift(g1pp, curve)
    for T in curve.times[1:]:
        assert zcb_price(g1pp, shift, 0.0, 0.0, T) == pytest.approx(discount(curve, T), rel=1e-12)


def test_shift_equals_forward_with_deterministic_rates(curve):
    params = G1ppParams.constant(0.02, 0.0)
    shift = calibrate_shift(params, curve)
    for t in (0.3, 1.0, 4.0, 19.9):
        assert shift_value(shift, t) == pytest.approx(instantaneous_forward(curve, t), rel=1e-12)


def test_zcb_price_beyond_curve_raises(curve, g1pp):
    shift = calibrate_shift(g1pp, curve)
    with pytest.raises(ExtrapolationError):
        zcb_price(g1pp, shift, 0.0, 0.0, 25.0)


def test_zcb_price_decreases_with_rate_state(curve, g1pp):
    shift = calibrate_shift(g1pp, curve)
    prices = zcb_price(g1pp, shift, 2.0, np.array([-0.01, 0.0, 0.01]), 7.0)
    assert prices[0] > prices[1] > prices[2]


def test_pz_bond_is_one_at_zero_state_without_vol():
    params = G1ppParams.constant(0.02, 0.0)
    assert pz_bond(params, 0.0, 0.0, 10.0) == 1.0


def test_forward_measure_drift():
    params = G1ppParams.constant(0.02, 0.01)
    drift = forward_measure_drift(params, 1.0, 0.005, 5.0)
    expected = -0.02 * 0.005 - b_factor(params, 1.0, 5.0) * 0.01**2
    assert drift == pytest.approx(expected, rel=1e-13)


def test_calibrate_shift_single_interval_is_flat_rate():
    curve = DiscountCurve.flat(0.01, [1.0])
    shift = calibrate_shift(G1ppParams.constant(0.02, 0.0), curve)
    assert shift.values.size == 1
    assert shift.values[0] == pytest.approx(0.01, rel=1e-12)
