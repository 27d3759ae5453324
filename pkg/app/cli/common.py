"""Utility condivise dai sotto-comandi: codici di uscita e percorsi di output."""

from __future__ import annotations

import logging
from pathlib import Path

from app.services.market_context import MarketContext

EXIT_OK = 0
EXIT_NUMERICAL = 1
EXIT_USAGE = 2
EXIT_NOT_CONVERGED = 3

logger = logging.getLogger("app.cli")


def output_path(ctx: MarketContext, name: str) -> Path:
    directory = Path(ctx.run.output_dir)
    directory.mkdir(parents=True, exist_ok=True)
    return directory / name
