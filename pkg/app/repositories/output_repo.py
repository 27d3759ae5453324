"""
Scrittura dei risultati: tabelle CSV plot-ready, report JSON, parametri di
fattore e leverage function calibrata.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any, Mapping

import numpy as np
import pandas as pd

from app.models import FactorParams, LeverageSurface
from app.parsers.leverage_parser import LEVERAGE_COLUMNS

TABLE_FLOAT_FORMAT = "%.12g"
EXACT_FLOAT_FORMAT = "%.17g"


def _json_default(value: Any) -> Any:
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, Path):
        return str(value)
    raise TypeError(f"Tipo non serializzabile: {type(value).__name__}")


def write_table(frame: pd.DataFrame, path: Path | str, *, exact: bool = False) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(
        path,
        index=False,
        float_format=EXACT_FLOAT_FORMAT if exact else TABLE_FLOAT_FORMAT,
        lineterminator="\n",
        encoding="utf-8",
    )
    return path


def write_json(data: Mapping[str, Any], path: Path | str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="\n") as handle:
        json.dump(data, handle, indent=2, sort_keys=True, default=_json_default)
        handle.write("\n")
    return path


def write_factors(params: FactorParams, path: Path | str, **extra: Any) -> Path:
    """factors.json rileggibile da `load_factors_file` (campi M, h, kappa più statistiche)."""
    return write_json({"M": params.M, "h": list(params.h), "kappa": list(params.kappa), **extra}, path)


def save_leverage_surface(surface: LeverageSurface, path: Path | str) -> Path:
    frames = []
    for reset, grid, matrix in zip(surface.resets, surface.y_grids, surface.values):
        frames.append(
            pd.DataFrame(
                {
                    "tenor": reset,
                    "y": np.tile(grid, surface.n_slices),
                    "t": np.repeat(surface.times, grid.size),
                    "L": matrix.reshape(-1),
                },
                columns=LEVERAGE_COLUMNS,
            )
        )
    return write_table(pd.concat(frames, ignore_index=True), path, exact=True)
