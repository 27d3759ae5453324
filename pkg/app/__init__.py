"""
Pacchetto principale del toolkit di calibrazione e pricing di derivati su inflazione.
"""

import logging

from config import DevConfig
from .extensions import init_logging


def init_app(config_class=DevConfig):
    """Inizializza il logging e restituisce la classe di configurazione attiva."""
    log_path = init_logging(config_class)
    logging.getLogger(__name__).info(
        "Toolkit inizializzato.", extra={"env": getattr(config_class, "ENV", "base"), "log_path": log_path}
    )
    return config_class
