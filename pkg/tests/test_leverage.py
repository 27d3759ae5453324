import numpy as np
import pytest

from app.models import (
    CpiTenor,
    CpiVolSurface,
    FactorParams,
    LeverageCalibrationError,
    LeverageSurface,
    McConfig,
    RateCorrelations,
    SigmaVector,
    ThetaEstimate,
    TotalVarianceSurface,
    ZcInstrument,
)
from app.services import leverage_service
from app.services.analytic_pricing_service import black_price
from app.services.factor_service import zeta
from app.services.g1pp_service import b_factor, calibrate_shift, ou_transition
from app.services.leverage_service import (
    BRACKET_FLOOR,
    NEGATIVE_FLOOR_FRACTION,
    LeverageProvider,
    calibrate_all,
    dupire_bracket,
    first_slice,
    slice_calibrate,
    theta_estimate,
    y_grid,
)
from app.services.market_data_service import discount, total_variance
from app.services.montecarlo_service import ConstantSigmaProvider, McSimulation, SimulationModel, price_zc_option_mc

from conftest import P2, deterministic_rates, flat_surface


def _model(curve, g, surface, factors=None, rho=0.0):
    factors = factors or FactorParams.single()
    return SimulationModel(
        curve=curve,
        g1pp=g,
        shift=calibrate_shift(g, curve),
        factors=factors,
        rates=RateCorrelations.uniform(rho, factors.M),
        surface=surface,
    )


def _surface_2x2():
    grids = (np.array([-0.1, 0.0, 0.1]), np.array([-0.2, 0.2]))
    values = (np.array([[1.0, 2.0, 3.0], [2.0, 3.0, 4.0]]), np.array([[1.0, 1.0], [3.0, 5.0]]))
    return LeverageSurface(resets=np.array([1.0, 2.0]), y_grids=grids, times=np.array([0.5, 1.0]), values=values)


# --- superficie ----------------------------------------------------------------
def test_y_grid_covers_annualized_strikes():
    grid = y_grid(2.0)
    assert grid.size == 71
    assert grid[0] == pytest.approx(2.0 * np.log(0.98), rel=1e-12)
    assert grid[-1] == pytest.approx(2.0 * np.log(1.05), rel=1e-12)
    assert grid[20] == pytest.approx(0.0, abs=1e-15)


def test_lookup_is_bilinear_with_flat_extrapolation():
    surface = _surface_2x2()
    assert surface.lookup(0, 0.05, 0.75) == pytest.approx(0.5 * 2.5 + 0.5 * 3.5)
    assert surface.lookup(0, 0.05, 0.1) == pytest.approx(2.5)
    assert surface.lookup(0, 0.5, 3.0) == pytest.approx(4.0)
    assert surface.lookup(1, 0.0, 1.0) == pytest.approx(4.0)


def test_with_slice_returns_new_snapshot():
    surface = _surface_2x2()
    extended = surface.with_slice(1.5, [np.ones(3), np.ones(2)])
    assert surface.n_slices == 2
    assert extended.n_slices == 3
    with pytest.raises(LeverageCalibrationError):
        extended.with_slice(1.5, [np.ones(3), np.ones(2)])


def test_surface_rejects_non_positive_values():
    with pytest.raises(LeverageCalibrationError):
        LeverageSurface(
            resets=np.array([1.0]), y_grids=(np.array([0.0, 1.0]),), times=np.array([0.5]), values=(np.array([[1.0, 0.0]]),)
        )


# --- formule di Dupire -----------------------------------------------------------
def test_bracket_is_one_for_flat_smile():
    y = np.linspace(-0.1, 0.1, 5)
    np.testing.assert_array_equal(dupire_bracket(y, 0.0004, 0.0, 0.0), np.ones(5))


def test_first_slice_flat_smile_single_factor_recovers_vol():
    tiv = TotalVarianceSurface(flat_surface([1.0, 2.0, 5.0], vol=0.025))
    result = first_slice(tiv, FactorParams.single(), 0.25)
    for values in result.values:
        np.testing.assert_allclose(values, 0.025, rtol=1e-14)
    assert result.bracket_floors == 0


def test_first_slice_divides_by_zeta():
    tiv = TotalVarianceSurface(flat_surface([1.0, 2.0, 5.0], vol=0.025))
    result = first_slice(tiv, P2, 0.25)
    for reset, values in zip((1.0, 2.0, 5.0), result.values):
        np.testing.assert_allclose(values * np.sqrt(zeta(P2, reset, reset, 0.25)), 0.025, rtol=1e-13)


def test_first_slice_solves_dupire_on_unfloored_nodes(surface):
    tiv = TotalVarianceSurface(surface)
    result = first_slice(tiv, FactorParams.single(), 0.25)
    for i, tenor in enumerate(surface.tenors):
        y = y_grid(tenor.reset)
        w, w_t, w_y, w_yy = total_variance(tiv, i, y, 0.25)
        bracket = dupire_bracket(y, w, w_y, w_yy)
        solved = bracket >= BRACKET_FLOOR
        np.testing.assert_allclose(result.values[i][solved] ** 2 * bracket[solved], w_t[solved], rtol=1e-12)
        assert np.all(np.isfinite(result.values[i]))


def test_floored_bracket_nodes_are_bridged_from_neighbours(monkeypatch):
    tiv = TotalVarianceSurface(flat_surface([1.0, 2.0], vol=0.025))
    holes = np.zeros(71, dtype=bool)
    holes[[0, 30, 31, 32]] = True

    def _bracket_with_holes(y, w, w_y, w_yy):
        return np.where(holes, -0.5, 1.0 + 10.0 * np.asarray(y))

    monkeypatch.setattr(leverage_service, "dupire_bracket", _bracket_with_holes)
    result = first_slice(tiv, FactorParams.single(), 0.25)

    assert result.bracket_floors == 2 * holes.sum()
    for reset, values in zip((1.0, 2.0), result.values):
        y = y_grid(reset)
        exact = 0.025 / np.sqrt(1.0 + 10.0 * y)
        np.testing.assert_allclose(values[~holes], exact[~holes], rtol=1e-13)
        np.testing.assert_allclose(values[30:33], np.interp(y[30:33], y[[29, 33]], exact[[29, 33]]), rtol=1e-13)
        assert values[0] == pytest.approx(exact[1], rel=1e-13)
        assert values.max() <= exact[~holes].max()


def test_first_slice_time_must_precede_first_reset():
    tiv = TotalVarianceSurface(flat_surface([1.0, 2.0]))
    with pytest.raises(LeverageCalibrationError):
        first_slice(tiv, FactorParams.single(), 1.5)
    with pytest.raises(LeverageCalibrationError):
        first_slice(tiv, FactorParams.single(), 0.0)


def test_slice_with_zero_theta_matches_deterministic_formula(surface):
    tiv = TotalVarianceSurface(surface)
    t = 0.5
    expected = first_slice(tiv, P2, t)
    for i, tenor in enumerate(surface.tenors):
        theta = ThetaEstimate.zero(i, t, y_grid(tenor.reset))
        solved = slice_calibrate(i, t, tiv, theta, P2, 0.9, np.ones(71))
        np.testing.assert_array_equal(solved.values[0], expected.values[i])


def test_negative_leverage_square_falls_back_to_previous_slice():
    tiv = TotalVarianceSurface(flat_surface([1.0, 2.0], vol=0.02))
    y = y_grid(2.0)
    theta = ThetaEstimate(1, 1.5, y, values=np.full(y.size, -1e3), stderr=np.zeros(y.size))
    previous = np.full(y.size, 0.03)
    solved = slice_calibrate(1, 1.5, tiv, theta, FactorParams.single(), 0.95, previous)
    np.testing.assert_allclose(solved.values[0], NEGATIVE_FLOOR_FRACTION * 0.03)
    assert solved.negative_floors == y.size


def test_slice_bridges_floored_nodes_but_keeps_negative_fallback(monkeypatch):
    tiv = TotalVarianceSurface(flat_surface([1.0, 2.0], vol=0.02))
    y = y_grid(2.0)
    holes = np.zeros(y.size, dtype=bool)
    holes[10:13] = True
    monkeypatch.setattr(leverage_service, "dupire_bracket", lambda y, w, w_y, w_yy: np.where(holes, 0.0, 1.0))
    values = np.zeros(y.size)
    values[40] = -1e3
    theta = ThetaEstimate(1, 1.5, y, values=values, stderr=np.zeros(y.size))
    solved = slice_calibrate(1, 1.5, tiv, theta, FactorParams.single(), 0.95, np.full(y.size, 0.03))

    assert solved.bracket_floors == 3
    assert solved.negative_floors == 1
    np.testing.assert_allclose(solved.values[0][holes], 0.02, rtol=1e-14)
    assert solved.values[0][40] == pytest.approx(NEGATIVE_FLOOR_FRACTION * 0.03)


def test_degenerate_sensitivity_ignores_theta():
    tiv = TotalVarianceSurface(flat_surface([1.0, 2.0], vol=0.02))
    y = np.array([5.0])
    theta = ThetaEstimate(1, 0.5, y, values=np.array([1e6]), stderr=np.zeros(1))
    solved = slice_calibrate(1, 0.5, tiv, theta, FactorParams.single(), 0.95, np.array([0.03]))
    assert solved.degenerate_nodes == 1
    assert solved.values[0][0] == pytest.approx(0.02, rel=1e-14)


# --- theta e bootstrap -----------------------------------------------------------
def test_theta_is_statistically_zero_when_model_matches_market(curve):
    surface = flat_surface([1.0, 2.0], vol=0.02)
    model = _model(curve, deterministic_rates(), surface)
    cfg = McConfig.build(n_paths=4096, seed=3, fixings=surface.resets)
    sigma = SigmaVector(resets=surface.resets, values=[0.02, 0.02])
    sim = McSimulation(model, cfg, ConstantSigmaProvider(sigma))
    sim.advance_to(1.0)
    y = y_grid(2.0)
    theta = theta_estimate(sim, 1, y, TotalVarianceSurface(surface))
    assert np.all(np.abs(theta.values) <= 5.0 * theta.stderr + 1e-4)


def _far_payment_model(curve, g1pp):
    tenor = CpiTenor(reset=5.0, payment=20.0, forward=110.0, kbar=np.array([-0.02, 0.0, 0.02, 0.05]), vols=np.full(4, 0.02))
    surface = CpiVolSurface((tenor,))
    return _model(curve, g1pp, surface), surface


@pytest.mark.slow
def test_theta_without_correlation_isolates_rate_convexity(curve, g1pp):
    model, surface = _far_payment_model(curve, g1pp)
    cfg = McConfig.build(n_paths=20000, seed=11, fixings=surface.resets)
    sim = McSimulation(model, cfg, ConstantSigmaProvider(SigmaVector(resets=surface.resets, values=[0.02])))
    sim.advance_to(4.5)
    tiv = TotalVarianceSurface(surface)
    y = np.array([-0.03, 0.0, 0.03])
    at_payment = theta_estimate(sim, 0, y, tiv)
    at_expiry = theta_estimate(sim, 0, y, tiv, settlement=4.5)

    # Con rho = 0: E^{T~}[r_T] - f(0, T) = -b(T, T~) Var(x_T)
    variance = ou_transition(g1pp, 0.0, 4.5)[1]
    strikes = 110.0 * np.exp(y)
    market = np.array(
        [
            black_price("cap" if yk > 0.0 else "floor", 110.0, k, 0.02**2 * 4.5, discount(curve, 20.0))
            for yk, k in zip(y, strikes)
        ]
    )
    expected = -b_factor(g1pp, 4.5, 20.0) * variance * market

    assert np.all(np.abs(at_payment.values - expected) <= 4.0 * at_payment.stderr)
    assert np.all(np.abs(expected) >= 5.0 * at_payment.stderr)
    assert np.all(np.abs(at_expiry.values) <= 4.0 * at_expiry.stderr)


def test_calibration_is_invariant_to_notional(curve, g1pp, surface):
    quoted = CpiVolSurface(surface.tenors[:2])
    model = _model(curve, g1pp, quoted, factors=P2, rho=-0.5)
    cfg = McConfig.build(n_paths=256, seed=5, fixings=quoted.resets, slice_dt=0.25)
    unit = calibrate_all(model, TotalVarianceSurface(quoted), cfg, notional=1.0).surface
    scaled = calibrate_all(model, TotalVarianceSurface(quoted), cfg, notional=1000.0).surface
    assert scaled.n_slices == unit.n_slices
    for i in range(len(quoted)):
        np.testing.assert_allclose(scaled.values[i], unit.values[i], rtol=1e-12)


def test_calibrate_all_deterministic_flat_smile(curve):
    surface = flat_surface([1.0, 2.0, 3.0], vol=0.02)
    model = _model(curve, deterministic_rates(), surface, factors=P2, rho=-0.5)
    cfg = McConfig.build(n_paths=64, seed=1, fixings=surface.resets, slice_dt=0.25)
    calibration = calibrate_all(model, TotalVarianceSurface(surface), cfg)
    lev = calibration.surface

    assert lev.n_slices == cfg.grid.size
    for i, reset in enumerate(surface.resets):
        for k, t in enumerate(lev.times):
            row = lev.slice_values(i, k)
            if t <= reset + 1e-9:
                np.testing.assert_allclose(row * np.sqrt(zeta(P2, reset, reset, t)), 0.02, rtol=1e-12)
            else:
                np.testing.assert_array_equal(row, lev.slice_values(i, k - 1))

    report = calibration.report()
    assert report["n_slices"] == cfg.grid.size
    assert report["negative_floors"] == 0
    assert report["bracket_floors"] == 0
    assert report["slices"][0]["t"] == pytest.approx(0.25)


@pytest.mark.slow
def test_leverage_recovers_flat_smile_with_stochastic_rates(curve, g1pp):
    surface = flat_surface([1.0, 2.0], vol=0.02)
    model = _model(curve, g1pp, surface)
    cfg = McConfig.build(n_paths=4000, seed=17, fixings=surface.resets, slice_dt=0.25)
    calibration = calibrate_all(model, TotalVarianceSurface(surface), cfg)
    assert calibration.report()["negative_floors"] == 0

    tenor = surface.tenors[1]
    inst = ZcInstrument(kind="cap", reset=tenor.reset, payment=tenor.payment, kbar=0.0, reference=tenor.forward)
    pricing_cfg = McConfig.build(n_paths=20000, seed=99, fixings=surface.resets, slice_dt=0.25)
    quote = price_zc_option_mc(inst, model, pricing_cfg, LeverageProvider(calibration.surface, model.log_forwards0))
    market = black_price("cap", tenor.forward, tenor.forward, 0.02**2 * tenor.reset, discount(curve, tenor.payment))
    assert abs(quote.value - market) < 4.0 * quote.stderr + 0.01 * market
