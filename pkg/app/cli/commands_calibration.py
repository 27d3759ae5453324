"""
Comandi di calibrazione: correlazioni storiche (fit dei parametri di fattore),
sigma per tenor e leverage function.
"""

from __future__ import annotations

import argparse

import pandas as pd

from app.models import FactorParams
from app.repositories import save_leverage_surface, write_factors, write_json, write_table
from app.services.correlation_service import (
    N_STARTS,
    correlation_table,
    fit_factor_params,
    market_correlations,
    pca,
)
from app.services.factor_service import sigma_table
from app.services.leverage_service import calibrate_all
from app.services.logging import log_structured_event
from app.services.market_context import MarketContext

from .common import EXIT_NOT_CONVERGED, EXIT_OK, output_path


def register(subparsers: argparse._SubParsersAction) -> None:
    correlations = subparsers.add_parser(
        "calibrate-correlations", help="Fit dei parametri di fattore sulle correlazioni storiche."
    )
    correlations.add_argument("--factors", type=int, choices=(2, 3), default=None, help="Numero di fattori M.")
    correlations.add_argument(
        "--history", default=None, help="CSV delle serie storiche (sostituisce inputs.history del config)."
    )
    correlations.add_argument("--starts", type=int, default=N_STARTS, help="Punti iniziali dell'ottimizzatore.")
    correlations.set_defaults(handler=cmd_calibrate_correlations)

    sigmas = subparsers.add_parser("calibrate-sigmas", help="Sigma per tenor e rapporti tra modelli a M fattori.")
    sigmas.set_defaults(handler=cmd_calibrate_sigmas)

    leverage = subparsers.add_parser("calibrate-leverage", help="Calibrazione slice per slice della leverage.")
    leverage.set_defaults(handler=cmd_calibrate_leverage)


def cmd_calibrate_correlations(ctx: MarketContext, args: argparse.Namespace) -> int:
    M = args.factors or (ctx.run.M if ctx.run.M in (2, 3) else 2)
    history = ctx.history
    target = market_correlations(history)
    components = pca(history)

    fit = fit_factor_params(
        target, M, n_starts=args.starts, seed=ctx.run.monte_carlo.seed, workers=ctx.run.monte_carlo.workers
    )
    write_factors(
        fit.params,
        output_path(ctx, "factors.json"),
        objective=fit.objective,
        converged=fit.converged,
        rho_rF=list(ctx.run.rho[:1]) * M,
    )
    write_table(correlation_table(fit.params, target), output_path(ctx, f"correlations_M{M}.csv"))

    pca_table = pd.DataFrame(
        {
            "component": range(1, components.eigenvalues.size + 1),
            "eigenvalue": components.eigenvalues,
            "fraction": components.individual_fractions,
            "cumulative": components.explained_fractions,
        }
    )
    for column, bucket in enumerate(target.tenors):
        pca_table[f"T{bucket:g}"] = components.eigenvectors[column, :]
    write_table(pca_table, output_path(ctx, "pca.csv"))

    log_structured_event(
        "cmd_calibrate_correlations",
        message="Fit delle correlazioni completato",
        logger_name="app.cli",
        factors=M,
        objective=fit.objective,
        converged=fit.converged,
    )
    return EXIT_OK if fit.converged else EXIT_NOT_CONVERGED


def cmd_calibrate_sigmas(ctx: MarketContext, args: argparse.Namespace) -> int:
    params = {m: FactorParams(M=m, h=block["h"], kappa=block["kappa"]) for m, block in ctx.run.factor_sets.items()}
    params[ctx.run.M] = ctx.factors
    params.pop(1, None)
    table = sigma_table(ctx.surface, params, ctx.run.kbar_star)
    write_table(table, output_path(ctx, "sigmas.csv"))
    log_structured_event(
        "cmd_calibrate_sigmas",
        message="Sigma calibrati per tutti i modelli",
        logger_name="app.cli",
        models=sorted([1, *params]),
        kbar_star=ctx.run.kbar_star,
    )
    return EXIT_OK


def cmd_calibrate_leverage(ctx: MarketContext, args: argparse.Namespace) -> int:
    calibration = calibrate_all(ctx.simulation_model, ctx.total_variance, ctx.mc_config())
    ctx.use_leverage(calibration.surface)
    save_leverage_surface(calibration.surface, output_path(ctx, "leverage.csv"))
    write_json(calibration.report(), output_path(ctx, "leverage_report.json"))
    return EXIT_OK
