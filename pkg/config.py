"""
Modulo di configurazione per il toolkit di calibrazione derivati inflazione.
"""

import os
from pathlib import Path

from dotenv import load_dotenv


BASE_DIR = Path(__file__).resolve().parent

# Un eventuale file .env locale sovrascrive solo le variabili non già presenti
load_dotenv(BASE_DIR / ".env")


class Config:
    """Configurazione base, comune a tutti gli ambienti."""

    # --- PERCORSI ---------------------------------------------------------------
    DATA_DIR = os.environ.get("DATA_DIR", str(BASE_DIR / "data" / "example"))
    OUTPUT_DIR = os.environ.get("OUTPUT_DIR", str(BASE_DIR / "output"))

    # --- MONTE CARLO ------------------------------------------------------------
    MC_PATHS = int(os.environ.get("MC_PATHS", "2000"))
    MC_SEED = int(os.environ.get("MC_SEED", "20230428"))
    MC_SLICE_DT = float(os.environ.get("MC_SLICE_DT", "0.25"))
    MC_SUBSTEPS = int(os.environ.get("MC_SUBSTEPS", "3"))
    # Dimensione fissa dei blocchi di path: il risultato non dipende dai worker
    MC_BLOCK_SIZE = int(os.environ.get("MC_BLOCK_SIZE", "256"))
    MC_WORKERS = int(os.environ.get("MC_WORKERS", "1"))

    # --- MODELLO ----------------------------------------------------------------
    SIMPLIFIED_ETA = float(os.environ.get("SIMPLIFIED_ETA", "10"))
    QUADRATURE_NODES = int(os.environ.get("QUADRATURE_NODES", "32"))
    # "natural" o "not-a-knot" (spline C2), "pchip" (cubica monotona, solo C1)
    SMILE_INTERPOLATION = os.environ.get("SMILE_INTERPOLATION", "natural")

    # --- LOGGING ----------------------------------------------------------------
    LOG_DIR = os.environ.get("LOG_DIR", str(BASE_DIR / "logs"))
    LOG_LEVEL = os.environ.get("LOG_LEVEL", "INFO")
    LOG_FILE_NAME = os.environ.get("LOG_FILE_NAME", "inflation.log")


class DevConfig(Config):
    """Configurazione per sviluppo: log verbosi."""
    DEBUG = True
    ENV = "development"
    LOG_LEVEL = os.environ.get("LOG_LEVEL", "DEBUG")


class ProdConfig(Config):
    """Configurazione per le esecuzioni batch di produzione."""
    DEBUG = False
    ENV = "production"
    LOG_LEVEL = os.environ.get("LOG_LEVEL", "INFO")
