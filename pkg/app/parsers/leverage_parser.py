"""
Parser della leverage function salvata da `calibrate-leverage`
(CSV `tenor,y,t,L`, una riga per tenor, slice e nodo in y).
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from app.models import LeverageCalibrationError, LeverageSurface
from app.parsers.market_data_parser import MarketDataParseError, _numeric_column, _read_csv

LEVERAGE_COLUMNS = ["tenor", "y", "t", "L"]


def load_leverage_surface(path: Path | str) -> LeverageSurface:
    frame = _read_csv(path, LEVERAGE_COLUMNS)
    if frame.empty:
        raise MarketDataParseError(path, "Nessun valore di leverage")
    tenors = _numeric_column(frame, "tenor", path)
    ys = _numeric_column(frame, "y", path)
    times = _numeric_column(frame, "t", path)
    values = _numeric_column(frame, "L", path)

    resets = np.unique(tenors)
    slice_times = np.unique(times)
    y_grids = []
    matrices = []
    for reset in resets:
        rows = tenors == reset
        grid = np.unique(ys[rows])
        if rows.sum() != grid.size * slice_times.size:
            raise MarketDataParseError(path, f"Griglia incompleta per il tenor T={reset:g}")
        matrix = np.full((slice_times.size, grid.size), np.nan)
        matrix[np.searchsorted(slice_times, times[rows]), np.searchsorted(grid, ys[rows])] = values[rows]
        if np.isnan(matrix).any():
            raise MarketDataParseError(path, f"Nodi duplicati per il tenor T={reset:g}")
        y_grids.append(grid)
        matrices.append(matrix)

    try:
        return LeverageSurface(resets=resets, y_grids=tuple(y_grids), times=slice_times, values=tuple(matrices))
    except LeverageCalibrationError as exc:
        raise MarketDataParseError(path, str(exc)) from exc
