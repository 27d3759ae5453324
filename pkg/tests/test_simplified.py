import numpy as np
import pytest

from app.models import CpiTenor, CpiVolSurface, FactorModelError, FactorParams, McConfig, RateCorrelations, SimplifiedParams, ZcInstrument
from app.services.analytic_pricing_service import black_price
from app.services.factor_service import zeta
from app.services.g1pp_service import calibrate_shift
from app.services.market_data_service import discount, vol_at
from app.services.montecarlo_service import SimulationModel, price_zc_options_mc
from app.services.simplified_service import SimplifiedProvider, coefficient, q_of_strike

from conftest import P2, deterministic_rates, flat_surface


def _steep_surface():
    # Due sole quote: la smile interpolata è lineare tra 100 e 150
    tenor = CpiTenor(reset=1.0, payment=1.0, forward=100.0, kbar=np.array([0.0, 0.5]), vols=np.array([0.02, 0.5]))
    return CpiVolSurface((tenor,))


def test_q_at_the_forward_is_market_vol(surface):
    sp = SimplifiedParams()
    forward = surface.tenors[3].forward
    assert q_of_strike(3, forward, surface, sp) == pytest.approx(vol_at(surface, 3, forward), rel=1e-14)


def test_q_on_flat_smile_is_constant():
    surface = flat_surface([1.0, 2.0], vol=0.03)
    strikes = surface.tenors[1].forward * np.array([0.8, 1.0, 1.3])
    np.testing.assert_allclose(q_of_strike(1, strikes, surface, SimplifiedParams()), 0.03, rtol=1e-14)


def test_q_is_capped_by_eta():
    surface = _steep_surface()
    sp = SimplifiedParams(eta=10.0)
    K = 140.0
    slope = (0.5 - 0.02) / 50.0
    sigma = 0.02 + slope * 40.0
    assert 1.0 - K * np.log(K / 100.0) * slope / sigma < 1.0 / sp.eta
    assert q_of_strike(0, K, surface, sp) == pytest.approx(sigma * sp.eta, rel=1e-12)


def test_q_without_cap_on_moderate_skew():
    surface = _steep_surface()
    K = 110.0
    slope = (0.5 - 0.02) / 50.0
    sigma = 0.02 + slope * 10.0
    expected = sigma / (1.0 - K * np.log(K / 100.0) * slope / sigma)
    assert q_of_strike(0, K, surface, SimplifiedParams()) == pytest.approx(expected, rel=1e-12)


def test_coefficient_divides_by_zeta_and_freezes_after_reset(surface):
    sp = SimplifiedParams()
    F = surface.tenors[2].forward * 1.05
    expected = q_of_strike(2, F, surface, sp) / np.sqrt(zeta(P2, 5.0, 5.0, 1.0))
    assert coefficient(2, F, 1.0, P2, surface, sp) == pytest.approx(expected, rel=1e-14)
    assert coefficient(2, F, 6.0, P2, surface, sp) == coefficient(2, F, 5.0, P2, surface, sp)


def test_provider_reads_log_forwards(surface):
    provider = SimplifiedProvider(surface, P2, SimplifiedParams())
    log_f = np.log(surface.tenors[0].forward * np.array([0.97, 1.0, 1.04]))
    direct = coefficient(0, np.exp(log_f), 0.5, P2, surface, SimplifiedParams())
    np.testing.assert_allclose(provider.coefficient(0, log_f, 0.5), direct, rtol=1e-15)


def test_eta_must_be_positive():
    with pytest.raises(FactorModelError):
        SimplifiedParams(eta=0.0)


def test_simplified_model_on_flat_smile_prices_black(curve):
    surface = flat_surface([1.0, 2.0], vol=0.025)
    g = deterministic_rates()
    model = SimulationModel(
        curve=curve,
        g1pp=g,
        shift=calibrate_shift(g, curve),
        factors=FactorParams.single(),
        rates=RateCorrelations(rho=(0.0,)),
        surface=surface,
    )
    cfg = McConfig.build(n_paths=8192, seed=4, fixings=surface.resets)
    forward = surface.tenors[1].forward
    instruments = [ZcInstrument(kind, 2.0, 2.0, kbar, forward) for kind, kbar in (("floor", -0.01), ("cap", 0.01))]
    quotes = price_zc_options_mc(instruments, model, cfg, SimplifiedProvider(surface, model.factors, SimplifiedParams()))
    for inst, quote in zip(instruments, quotes):
        expected = black_price(inst.kind, forward, inst.strike_level, 0.025**2 * 2.0, discount(curve, 2.0))
        assert abs(quote.value - expected) < 4.0 * quote.stderr
