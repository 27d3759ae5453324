"""
Serializzazione canonica dei dati di mercato.

Formato fisso (header, float `%.17g`, fine riga LF): serialize -> load -> serialize
produce file identici byte per byte.
"""

from __future__ import annotations

from pathlib import Path
from typing import Dict, Optional

import numpy as np
import pandas as pd

from app.models import CpiVolSurface, DiscountCurve, HistoricalSeries
from app.parsers.market_data_parser import DISCOUNT_COLUMNS, HISTORY_COLUMNS, VOL_COLUMNS

FLOAT_FORMAT = "%.17g"
DISCOUNTS_FILE = "discounts.csv"
VOLS_FILE = "cpi_vols.csv"
HISTORY_FILE = "history.csv"


def _write_frame(frame: pd.DataFrame, path: Path) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(path, index=False, float_format=FLOAT_FORMAT, lineterminator="\n", encoding="utf-8")
    return path


def write_discount_curve(curve: DiscountCurve, path: Path | str) -> Path:
    frame = pd.DataFrame({"T": curve.times, "df": curve.discount_factors}, columns=DISCOUNT_COLUMNS)
    return _write_frame(frame, Path(path))


def write_vol_surface(surface: CpiVolSurface, path: Path | str) -> Path:
    rows = []
    for tenor in surface.tenors:
        for kbar, vol in zip(tenor.kbar, tenor.vols):
            rows.append((tenor.reset, tenor.payment, tenor.forward, kbar, vol))
    return _write_frame(pd.DataFrame(rows, columns=VOL_COLUMNS), Path(path))


def write_history(history: HistoricalSeries, path: Path | str) -> Path:
    """Formato lungo `date,bucket,logF`, ordinato per data e bucket."""
    n_rows, n_buckets = history.log_levels.shape
    frame = pd.DataFrame(
        {
            "date": np.repeat(history.dates, n_buckets).astype(str),
            "bucket": np.tile(history.tenors, n_rows),
            "logF": history.log_levels.reshape(-1),
        },
        columns=HISTORY_COLUMNS,
    )
    return _write_frame(frame, Path(path))


def serialize_market(
    curve: DiscountCurve,
    surface: CpiVolSurface,
    history: Optional[HistoricalSeries],
    directory: Path | str,
) -> Dict[str, Path]:
    directory = Path(directory)
    paths = {
        "discounts": write_discount_curve(curve, directory / DISCOUNTS_FILE),
        "vols": write_vol_surface(surface, directory / VOLS_FILE),
    }
    if history is not None:
        paths["history"] = write_history(history, directory / HISTORY_FILE)
    return paths
