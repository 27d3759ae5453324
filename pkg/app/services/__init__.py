"""
Pacchetto per i servizi (logica numerica) del toolkit.

I servizi orchestrano:
- dati di mercato e varianza totale
- modello dei tassi G1++ e struttura a fattori
- calibrazione delle correlazioni, dei sigma e della leverage
- pricer analitici e motore Monte Carlo
- logging strutturato
"""

from .analytic_pricing_service import (
    black_price,
    implied_vol,
    yoy_cap_floor,
    yoy_swap,
    zc_cap_floor,
    zc_swap,
)
from .correlation_service import fit_factor_params, market_correlations, pca
from .factor_service import calibrate_sigmas, integrated_zeta, sigma_table
from .g1pp_service import calibrate_shift, zcb_price
from .leverage_service import calibrate_all
from .montecarlo_service import McSimulation, martingale_check, price_yoy_options_mc, price_zc_options_mc

__all__ = [
    "black_price",
    "implied_vol",
    "yoy_cap_floor",
    "yoy_swap",
    "zc_cap_floor",
    "zc_swap",
    "fit_factor_params",
    "market_correlations",
    "pca",
    "calibrate_sigmas",
    "integrated_zeta",
    "sigma_table",
    "calibrate_shift",
    "zcb_price",
    "calibrate_all",
    "McSimulation",
    "martingale_check",
    "price_yoy_options_mc",
    "price_zc_options_mc",
]
