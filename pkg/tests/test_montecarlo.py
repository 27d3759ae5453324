import numpy as np
import pytest

from app.models import (
    FactorParams,
    McConfig,
    RateCorrelations,
    SigmaVector,
    SimulationError,
    YoyInstrument,
    ZcInstrument,
)
from app.services.analytic_pricing_service import black_price, yoy_cap_floor
from app.services.factor_service import calibrate_sigmas
from app.services.g1pp_service import calibrate_shift
from app.services.market_data_service import discount
from app.services.montecarlo_service import (
    ConstantSigmaProvider,
    McSimulation,
    SimulationModel,
    build_correlation,
    martingale_check,
    mean_and_stderr,
    price_yoy_option_mc,
    price_yoy_options_mc,
    price_zc_option_mc,
    price_zc_options_mc,
)

from conftest import P2, deterministic_rates, flat_surface

RESETS = [1.0, 2.0, 5.0]


def _model(curve, g, factors=None, rho=0.0, surface=None):
    factors = factors or FactorParams.single()
    return SimulationModel(
        curve=curve,
        g1pp=g,
        shift=calibrate_shift(g, curve),
        factors=factors,
        rates=RateCorrelations.uniform(rho, factors.M),
        surface=surface or flat_surface(RESETS, vol=0.02),
    )


def _cfg(n_paths=512, seed=20230428, **kwargs):
    return McConfig.build(n_paths=n_paths, seed=seed, fixings=RESETS, **kwargs)


def _constant(model, vol):
    return ConstantSigmaProvider(SigmaVector(resets=model.resets, values=np.full(len(model.resets), vol)))


class _NanProvider:
    def coefficient(self, i, log_forward, t):
        return np.full(log_forward.shape, np.nan)


# --- fattore di sconto -------------------------------------------------------
def test_discount_is_exact_with_deterministic_rates(curve):
    model = _model(curve, deterministic_rates())
    sim = McSimulation(model, _cfg(n_paths=16), ConstantSigmaProvider.zero(model.resets))
    for T in RESETS:
        sim.advance_to(T)
        np.testing.assert_allclose(sim.discount, discount(curve, T), rtol=1e-12)


def test_martingale_check_with_stochastic_rates(curve, g1pp):
    model = _model(curve, g1pp)
    cfg = McConfig.build(n_paths=10000, seed=20230428, fixings=RESETS, horizon=20.0)
    table = martingale_check(model, cfg, [1.0, 5.0, 10.0, 20.0])
    assert list(table.columns) == ["T", "mc_discount", "stderr", "market_discount", "z_score"]
    assert list(table["T"]) == [1.0, 5.0, 10.0, 20.0]
    assert np.all(table["stderr"] > 0.0)
    assert np.all(np.abs(table["z_score"]) < 3.5)


def test_discount_to_payment_uses_bond_price(curve, g1pp):
    model = _model(curve, g1pp)
    sim = McSimulation(model, _cfg(n_paths=8), ConstantSigmaProvider.zero(model.resets)).advance_to(2.0)
    np.testing.assert_allclose(sim.discount_to(2.0), sim.discount)
    assert np.all(sim.discount_to(5.0) < sim.discount)
    with pytest.raises(SimulationError):
        sim.discount_to(1.0)


# --- forward CPI ---------------------------------------------------------------
def test_zero_vol_forwards_stay_at_initial_value(curve):
    model = _model(curve, deterministic_rates())
    inst = ZcInstrument(kind="cap", reset=5.0, payment=5.0, kbar=-0.01, reference=model.surface.forwards[2])
    quote = price_zc_option_mc(inst, model, _cfg(n_paths=64), ConstantSigmaProvider.zero(model.resets))
    expected = discount(curve, 5.0) * max(model.surface.forwards[2] - inst.strike_level, 0.0)
    assert quote.value == pytest.approx(expected, rel=1e-12, abs=1e-12)
    assert quote.stderr == pytest.approx(0.0, abs=1e-12)
    assert quote.method == "mc"


def test_antithetic_pairs_cancel_log_forward_noise(curve):
    model = _model(curve, deterministic_rates())
    cfg = _cfg(n_paths=256, antithetic=True, block_size=64)
    sim = McSimulation(model, cfg, _constant(model, 0.02)).advance_to(5.0)
    mean, stderr = sim.estimate(sim.log_forwards[:, 2])
    assert mean == pytest.approx(model.log_forwards0[2] - 0.5 * 0.02**2 * 5.0, abs=1e-12)
    assert stderr == pytest.approx(0.0, abs=1e-12)


def test_forwards_frozen_after_reset(curve, g1pp):
    model = _model(curve, g1pp)
    sim = McSimulation(model, _cfg(n_paths=32), _constant(model, 0.02)).advance_to(1.0)
    at_reset = sim.log_forwards[:, 0].copy()
    sim.advance_to(2.0)
    np.testing.assert_array_equal(sim.log_forwards[:, 0], at_reset)
    assert not np.allclose(sim.log_forwards[:, 1], model.log_forwards0[1])


def test_constant_vol_cap_matches_black(curve):
    model = _model(curve, deterministic_rates())
    forward = model.surface.forwards[2]
    instruments = [
        ZcInstrument(kind=kind, reset=5.0, payment=5.0, kbar=kbar, reference=forward)
        for kind, kbar in (("cap", 0.0), ("cap", 0.02), ("floor", -0.01))
    ]
    quotes = price_zc_options_mc(instruments, model, _cfg(n_paths=8192), _constant(model, 0.02))
    for inst, quote in zip(instruments, quotes):
        expected = black_price(inst.kind, forward, inst.strike_level, 0.02**2 * 5.0, discount(curve, 5.0))
        assert abs(quote.value - expected) < 4.0 * quote.stderr


@pytest.mark.slow
def test_two_factor_cap_with_stochastic_rates_matches_black(curve, g1pp, surface):
    model = _model(curve, g1pp, factors=P2, rho=-0.5, surface=surface)
    sigma = calibrate_sigmas(P2, surface)
    i = 4
    tenor = surface.tenors[i]
    inst = ZcInstrument(kind="cap", reset=tenor.reset, payment=tenor.payment, kbar=0.0, reference=tenor.forward)
    cfg = McConfig.build(n_paths=20000, seed=5, fixings=surface.resets)
    quote = price_zc_option_mc(inst, model, cfg, ConstantSigmaProvider(sigma))
    atm = tenor.vols[tenor.kbar == 0.0][0]
    expected = black_price("cap", tenor.forward, tenor.forward, atm**2 * tenor.reset, discount(curve, tenor.payment))
    assert abs(quote.value - expected) < 4.0 * quote.stderr


def test_yoy_mc_matches_analytic_single_factor(curve):
    model = _model(curve, deterministic_rates())
    sigma = SigmaVector(resets=model.resets, values=[0.02, 0.02, 0.02])
    instruments = [YoyInstrument("cap", 1.0, 2.0, 2.0, kbar, 1000.0) for kbar in (0.0, 0.02)]
    quotes = price_yoy_options_mc(instruments, model, _cfg(n_paths=8192), ConstantSigmaProvider(sigma))
    for inst, quote in zip(instruments, quotes):
        analytic = yoy_cap_floor(
            inst, curve, model.surface, sigma, model.factors, model.rates, model.g1pp
        ).value
        assert abs(quote.value - analytic) < 4.0 * quote.stderr


@pytest.mark.slow
@pytest.mark.parametrize("sigma_i, sigma_j", [(0.06, 0.01), (0.01, 0.06), (0.04, 0.04)])
def test_yoy_mc_matches_analytic_with_stochastic_rates(curve, g1pp, sigma_i, sigma_j):
    surface = flat_surface([1.0, 2.0], vol=0.02)
    model = _model(curve, g1pp, factors=P2, rho=-0.5, surface=surface)
    sigma = SigmaVector(resets=surface.resets, values=[sigma_i, sigma_j])
    instruments = [
        YoyInstrument("swap", 1.0, 2.0, 2.0, 0.0, 1000.0),
        YoyInstrument("cap", 1.0, 2.0, 2.0, 0.02, 1000.0),
    ]
    cfg = McConfig.build(n_paths=65536, seed=7, fixings=surface.resets, antithetic=True)
    quotes = price_yoy_options_mc(instruments, model, cfg, ConstantSigmaProvider(sigma))
    for inst, quote in zip(instruments, quotes):
        analytic = yoy_cap_floor(inst, curve, surface, sigma, P2, model.rates, g1pp).value
        assert abs(quote.value - analytic) < 4.0 * quote.stderr


def test_single_yoy_quote_matches_batch(curve):
    model = _model(curve, deterministic_rates())
    provider = _constant(model, 0.02)
    inst = YoyInstrument("floor", 1.0, 2.0, 2.0, 0.01, 1000.0)
    cfg = _cfg(n_paths=1024)
    single = price_yoy_option_mc(inst, model, cfg, provider)
    batch = price_yoy_options_mc([inst], model, cfg, provider)
    assert single.value == batch[0].value
    assert single.stderr > 0.0


# --- riproducibilità ---------------------------------------------------------
def test_results_do_not_depend_on_worker_count(curve, g1pp):
    model = _model(curve, g1pp, factors=P2, rho=-0.5)
    inst = ZcInstrument(kind="cap", reset=5.0, payment=5.0, kbar=0.0, reference=model.surface.forwards[2])
    serial = price_zc_option_mc(inst, model, _cfg(n_paths=320, block_size=64, workers=1), _constant(model, 0.02))
    threaded = price_zc_option_mc(inst, model, _cfg(n_paths=320, block_size=64, workers=4), _constant(model, 0.02))
    assert serial.value == threaded.value
    assert serial.stderr == threaded.stderr


def test_seed_changes_the_estimate(curve, g1pp):
    model = _model(curve, g1pp)
    inst = ZcInstrument(kind="cap", reset=2.0, payment=2.0, kbar=0.0, reference=model.surface.forwards[1])
    first = price_zc_option_mc(inst, model, _cfg(n_paths=256, seed=1), _constant(model, 0.02))
    second = price_zc_option_mc(inst, model, _cfg(n_paths=256, seed=2), _constant(model, 0.02))
    assert first.value != second.value


# --- errori ------------------------------------------------------------------
def test_non_finite_paths_abort_the_simulation(curve):
    model = _model(curve, deterministic_rates())
    sim = McSimulation(model, _cfg(n_paths=64), _NanProvider())
    with pytest.raises(SimulationError):
        sim.advance_to(1.0)


def test_simulation_cannot_go_back_or_leave_the_grid(curve):
    model = _model(curve, deterministic_rates())
    sim = McSimulation(model, _cfg(n_paths=16), ConstantSigmaProvider.zero(model.resets)).advance_to(2.0)
    with pytest.raises(SimulationError):
        sim.advance_to(1.0)
    with pytest.raises(SimulationError):
        sim.advance_to(2.1)


def test_mean_and_stderr_skips_invalid_paths():
    samples = np.array([1.0, 2.0, 3.0, 100.0])
    valid = np.array([True, True, True, False])
    mean, stderr = mean_and_stderr(samples, valid, [(0, 4)], antithetic=False)
    assert mean == pytest.approx(2.0)
    assert stderr == pytest.approx(1.0 / np.sqrt(3.0))
    with pytest.raises(SimulationError):
        mean_and_stderr(samples, np.zeros(4, dtype=bool), [(0, 4)], antithetic=False)


def test_mc_config_validation():
    with pytest.raises(SimulationError):
        McConfig.build(n_paths=255, seed=1, fixings=RESETS, antithetic=True)
    with pytest.raises(SimulationError):
        McConfig(n_paths=16, seed=1, grid=np.array([0.5, 1.0]), fixings=np.array([0.75]))
    cfg = McConfig.build(n_paths=16, seed=1, fixings=[0.3, 1.0], slice_dt=0.25)
    np.testing.assert_allclose(cfg.grid, [0.25, 0.3, 0.5, 0.75, 1.0])


def test_correlation_cholesky_semidefinite():
    chol = build_correlation(RateCorrelations(rho=(0.6, 0.8)))
    np.testing.assert_allclose(chol.lower @ chol.lower.T, chol.matrix, atol=1e-12)
    assert chol.lower[2, 2] == pytest.approx(0.0, abs=1e-7)
