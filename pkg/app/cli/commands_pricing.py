"""
Comandi di pricing: prezzi analitici/MC di strumenti configurati, recupero
delle volatilità implicite di mercato e confronto YoY analitico vs Monte Carlo.
"""

from __future__ import annotations

import argparse
from typing import Any, Dict, List, Mapping, Tuple

import numpy as np
import pandas as pd

from app.models import PricingError, YoyInstrument, ZcInstrument
from app.repositories import write_table
from app.services.analytic_pricing_service import (
    VOL_LOWER,
    black_price,
    implied_vol,
    yoy_cap_floor,
    yoy_swap,
    zc_cap_floor,
    zc_swap,
)
from app.services.factor_service import calibrate_sigmas
from app.services.logging import log_structured_event
from app.services.market_context import MarketContext
from app.services.market_data_service import discount, tenor_index, vol_at
from app.services.montecarlo_service import price_yoy_options_mc, price_zc_options_mc

from .common import EXIT_OK, output_path

PRICE_COLUMNS = ["kind", "Ti", "Tj", "Tp", "K", "value", "stderr", "method"]
RECOVERY_COLUMNS = ["tenor", "Kbar", "market_vol", "mc_vol", "mc_vol_lo", "mc_vol_hi"]


def register(subparsers: argparse._SubParsersAction) -> None:
    price = subparsers.add_parser("price", help="Prezzi degli strumenti configurati (analitico e/o Monte Carlo).")
    price.add_argument("--method", choices=("analytic", "mc", "both"), default="both")
    price.set_defaults(handler=cmd_price)

    recover = subparsers.add_parser("recover-vols", help="Volatilità implicite MC del modello scelto contro il mercato.")
    recover.set_defaults(handler=cmd_recover_vols)

    yoy = subparsers.add_parser("yoy-compare", help="Cap YoY: Monte Carlo contro formula analitica per più K̄*.")
    yoy.set_defaults(handler=cmd_yoy_compare)


# ---------------------------------------------------------------------------
# price
# ---------------------------------------------------------------------------
def _zc_from_mapping(ctx: MarketContext, item: Mapping[str, Any]) -> ZcInstrument:
    reset = float(item["Ti"])
    tenor = ctx.surface.tenors[tenor_index(ctx.surface, reset)]
    payment = float(item.get("Tp", tenor.payment))
    if abs(payment - tenor.payment) > 1e-9:
        raise PricingError(f"Il pagamento T~={payment:g} non coincide con quello del tenor T={reset:g}")
    return ZcInstrument(
        kind=item.get("kind", "cap"),
        reset=reset,
        payment=payment,
        kbar=float(item.get("Kbar", 0.0)),
        reference=float(item.get("reference", ctx.run.reference_index or tenor.forward)),
        notional=float(item.get("notional", 1.0)),
    )


def _yoy_from_mapping(item: Mapping[str, Any]) -> YoyInstrument:
    return YoyInstrument(
        kind=item.get("kind", "cap"),
        first_reset=float(item["Ti"]),
        second_reset=float(item["Tj"]),
        payment=float(item.get("Tp", item["Tj"])),
        kbar=float(item.get("Kbar", 0.0)),
        notional=float(item.get("notional", 1.0)),
    )


def _default_instruments(ctx: MarketContext) -> List[Dict[str, Any]]:
    items: List[Dict[str, Any]] = [
        {"type": "zc", "kind": "cap", "Ti": tenor.reset, "Kbar": ctx.run.kbar_star} for tenor in ctx.surface.tenors
    ]
    yoy = ctx.run.yoy
    items.append(
        {
            "type": "yoy",
            "kind": "cap",
            "Ti": yoy.first_reset,
            "Tj": yoy.second_reset,
            "Tp": yoy.payment,
            "Kbar": 0.0,
            "notional": yoy.notional,
        }
    )
    return items


def _zc_analytic(ctx: MarketContext, inst: ZcInstrument):
    i = tenor_index(ctx.surface, inst.reset)
    forward = ctx.surface.tenors[i].forward
    if inst.kind == "swap":
        return zc_swap(inst, ctx.curve, forward)
    w = float(vol_at(ctx.surface, i, inst.strike_level)) ** 2 * inst.reset
    return zc_cap_floor(inst, ctx.curve, forward, w)


def _yoy_analytic(ctx: MarketContext, inst: YoyInstrument):
    args = (ctx.curve, ctx.surface, ctx.sigma, ctx.factors, ctx.rates, ctx.g1pp)
    if inst.kind == "swap":
        return yoy_swap(inst, *args)
    return yoy_cap_floor(inst, *args)


def _price_row(inst, quote) -> Dict[str, Any]:
    if isinstance(inst, ZcInstrument):
        Ti, Tj, strike = inst.reset, np.nan, inst.strike_level
    else:
        Ti, Tj, strike = inst.first_reset, inst.second_reset, inst.strike
    return {
        "kind": f"{'zc' if isinstance(inst, ZcInstrument) else 'yoy'}_{inst.kind}",
        "Ti": Ti,
        "Tj": Tj,
        "Tp": inst.payment,
        "K": strike,
        "value": quote.value,
        "stderr": quote.stderr,
        "method": quote.method,
    }


def cmd_price(ctx: MarketContext, args: argparse.Namespace) -> int:
    items = list(ctx.run.instruments) or _default_instruments(ctx)
    zc = [_zc_from_mapping(ctx, item) for item in items if item.get("type", "zc") == "zc"]
    yoy = [_yoy_from_mapping(item) for item in items if item.get("type", "zc") == "yoy"]

    rows: List[Dict[str, Any]] = []
    if args.method in ("analytic", "both"):
        rows.extend(_price_row(inst, _zc_analytic(ctx, inst)) for inst in zc)
        rows.extend(_price_row(inst, _yoy_analytic(ctx, inst)) for inst in yoy)
    if args.method in ("mc", "both"):
        model, cfg, provider = ctx.simulation_model, ctx.mc_config(), ctx.provider()
        if zc:
            rows.extend(_price_row(inst, q) for inst, q in zip(zc, price_zc_options_mc(zc, model, cfg, provider)))
        if yoy:
            rows.extend(_price_row(inst, q) for inst, q in zip(yoy, price_yoy_options_mc(yoy, model, cfg, provider)))

    write_table(pd.DataFrame(rows, columns=PRICE_COLUMNS), output_path(ctx, "prices.csv"))
    log_structured_event(
        "cmd_price",
        message="Prezzi calcolati",
        logger_name="app.cli",
        instruments=len(zc) + len(yoy),
        method=args.method,
        model=ctx.run.model,
    )
    return EXIT_OK


# ---------------------------------------------------------------------------
# recover-vols
# ---------------------------------------------------------------------------
def _implied_or_bound(price: float, inst: ZcInstrument, ctx: MarketContext, forward: float) -> float:
    """Volatilità implicita; sotto l'intrinseco -> estremo inferiore, oltre la banda -> NaN."""
    try:
        return implied_vol(price, inst, ctx.curve, forward)
    except PricingError:
        intrinsic = black_price(
            inst.kind, forward, inst.strike_level, 0.0, discount(ctx.curve, inst.payment), inst.notional
        )
        return VOL_LOWER if price <= intrinsic else float("nan")


def recovery_table(ctx: MarketContext) -> pd.DataFrame:
    """Opzioni out-of-the-money (cap per K̄ > 0, floor altrimenti) su tutta la griglia quotata."""
    instruments: List[Tuple[int, float, ZcInstrument]] = []
    for i, tenor in enumerate(ctx.surface.tenors):
        for kbar, market_vol in zip(tenor.kbar, tenor.vols):
            inst = ZcInstrument(
                kind="cap" if kbar > 0.0 else "floor",
                reset=tenor.reset,
                payment=tenor.payment,
                kbar=float(kbar),
                reference=tenor.forward,
            )
            instruments.append((i, float(market_vol), inst))

    quotes = price_zc_options_mc(
        [inst for _, _, inst in instruments], ctx.simulation_model, ctx.mc_config(), ctx.provider()
    )
    rows = []
    for (i, market_vol, inst), quote in zip(instruments, quotes):
        forward = ctx.surface.tenors[i].forward
        low, high = quote.band
        rows.append(
            {
                "tenor": inst.reset,
                "Kbar": inst.kbar,
                "market_vol": market_vol,
                "mc_vol": _implied_or_bound(quote.value, inst, ctx, forward),
                "mc_vol_lo": _implied_or_bound(low, inst, ctx, forward),
                "mc_vol_hi": _implied_or_bound(high, inst, ctx, forward),
            }
        )
    return pd.DataFrame(rows, columns=RECOVERY_COLUMNS)


def cmd_recover_vols(ctx: MarketContext, args: argparse.Namespace) -> int:
    table = recovery_table(ctx)
    write_table(table, output_path(ctx, f"recover_vols_{ctx.run.model}.csv"))
    inside = (table["market_vol"] >= table["mc_vol_lo"]) & (table["market_vol"] <= table["mc_vol_hi"])
    log_structured_event(
        "cmd_recover_vols",
        message="Volatilità recuperate dal Monte Carlo",
        logger_name="app.cli",
        model=ctx.run.model,
        points=len(table),
        inside_band=float(inside.mean()),
    )
    return EXIT_OK


# ---------------------------------------------------------------------------
# yoy-compare
# ---------------------------------------------------------------------------
def _analytic_column(kbar_star: float) -> str:
    return f"analytic_kstar_{kbar_star:+.3f}"


def yoy_comparison_table(ctx: MarketContext) -> pd.DataFrame:
    settings = ctx.run.yoy
    instruments = [
        YoyInstrument("cap", settings.first_reset, settings.second_reset, settings.payment, kbar, settings.notional)
        for kbar in settings.kbars
    ]
    quotes = price_yoy_options_mc(instruments, ctx.simulation_model, ctx.mc_config(), ctx.provider())
    table = pd.DataFrame(
        {
            "Kbar": [inst.kbar for inst in instruments],
            "mc_price": [q.value for q in quotes],
            "mc_stderr": [q.stderr for q in quotes],
            "mc_lo": [q.band[0] for q in quotes],
            "mc_hi": [q.band[1] for q in quotes],
        }
    )

    columns = []
    for kbar_star in settings.sigma_kbars:
        sigma = calibrate_sigmas(ctx.factors, ctx.surface, kbar_star)
        column = _analytic_column(kbar_star)
        table[column] = [
            yoy_cap_floor(inst, ctx.curve, ctx.surface, sigma, ctx.factors, ctx.rates, ctx.g1pp).value
            for inst in instruments
        ]
        columns.append(column)
    table["analytic_spread"] = table[columns].max(axis=1) - table[columns].min(axis=1)
    return table


def cmd_yoy_compare(ctx: MarketContext, args: argparse.Namespace) -> int:
    table = yoy_comparison_table(ctx)
    write_table(table, output_path(ctx, f"yoy_compare_{ctx.run.model}.csv"))

    nearest = min(ctx.run.yoy.sigma_kbars, key=abs)
    reference = table[_analytic_column(nearest)]
    inside = (reference >= table["mc_lo"]) & (reference <= table["mc_hi"])
    log_structured_event(
        "cmd_yoy_compare",
        message="Confronto YoY completato",
        logger_name="app.cli",
        model=ctx.run.model,
        strikes=len(table),
        atm_inside_band=float(inside.mean()),
        max_analytic_spread=float(table["analytic_spread"].max()),
    )
    return EXIT_OK
