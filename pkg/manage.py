#!/usr/bin/env python3
"""
Script di avvio per il toolkit di calibrazione e pricing di derivati su inflazione.

Uso:
    python manage.py calibrate-correlations --factors 2   # Fit dei parametri di fattore
    python manage.py calibrate-sigmas                     # Sigma per tenor (M = 1, 2, 3)
    python manage.py calibrate-leverage                   # Leverage function + report
    python manage.py price --method both                  # Prezzi analitici e Monte Carlo
    python manage.py recover-vols --model simplified      # Vol implicite MC contro mercato
    python manage.py yoy-compare                          # Cap YoY: MC contro analitico

Codici di uscita: 0 successo, 1 errore numerico, 2 errore di uso o di dati,
3 ottimizzatore non convergente.
"""

import argparse
import logging
import os
import sys
from pathlib import Path
from typing import Optional, Sequence

from app import init_app
from app.cli import register_commands
from app.cli.common import EXIT_NUMERICAL, EXIT_USAGE
from app.parsers.config_parser import load_run_config
from app.services.dto import MODEL_CHOICES
from app.services.market_context import MarketContext
from config import Config, DevConfig, ProdConfig

# ---------------------------------------------------------------------
# Logger CLI
# ---------------------------------------------------------------------
cli_logger = logging.getLogger("manage_cli")


# ---------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------
def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        description="Calibrazione e pricing di derivati su inflazione (G1++ + forward CPI multi-fattore)."
    )
    parser.add_argument(
        "--config",
        default=str(Path(Config.DATA_DIR) / "config.json"),
        help="File di configurazione JSON dell'esecuzione.",
    )
    parser.add_argument("--seed", type=int, default=None, help="Seed del Monte Carlo.")
    parser.add_argument("--paths", type=int, default=None, help="Numero di path Monte Carlo.")
    parser.add_argument("--out", default=None, help="Cartella di output.")
    parser.add_argument("--slice-dt", type=float, default=None, help="Passo delle slice temporali.")
    parser.add_argument("--substeps", type=int, default=None, help="Sotto-passi per slice.")
    parser.add_argument("--antithetic", action="store_true", default=None, help="Variabili antitetiche.")
    parser.add_argument("--workers", type=int, default=None, help="Thread per la simulazione.")
    parser.add_argument("--model", choices=MODEL_CHOICES, default=None, help="Modello di diffusione.")
    parser.add_argument("--leverage", default=None, help="CSV di leverage già calibrata.")

    subparsers = parser.add_subparsers(dest="command", required=True)
    register_commands(subparsers)
    return parser


def _overrides(args: argparse.Namespace) -> dict:
    return {
        "seed": args.seed,
        "paths": args.paths,
        "out": args.out,
        "slice_dt": args.slice_dt,
        "substeps": args.substeps,
        "antithetic": args.antithetic,
        "workers": args.workers,
        "model": args.model,
        "leverage": str(Path(args.leverage).resolve()) if args.leverage else None,
        "history": str(Path(args.history).resolve()) if getattr(args, "history", None) else None,
    }


# ---------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------
def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)

    init_app(ProdConfig if os.environ.get("APP_ENV") == "production" else DevConfig)

    try:
        run = load_run_config(args.config, _overrides(args))
        cli_logger.info("Avvio comando %s", args.command, extra={"command": args.command, **run.summary()})
        with MarketContext(run) as ctx:
            code = args.handler(ctx, args)
    except (FileNotFoundError, ValueError) as exc:
        cli_logger.error("Errore di uso o di dati: %s", exc, extra={"command": args.command})
        return EXIT_USAGE
    except (RuntimeError, ArithmeticError) as exc:
        cli_logger.error("Errore numerico: %s", exc, extra={"command": args.command})
        return EXIT_NUMERICAL

    cli_logger.info("Comando %s terminato", args.command, extra={"command": args.command, "exit_code": code})
    return code


if __name__ == "__main__":
    sys.exit(main())
