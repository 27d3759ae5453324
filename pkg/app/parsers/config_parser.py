"""
Lettura della configurazione di esecuzione (`config.json`) e del file dei
parametri di fattore prodotto da `calibrate-correlations`.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any, Dict, Mapping, Optional

from app.services.dto import RunConfig, RunConfigError


def _read_json(path: Path | str) -> Dict[str, Any]:
    file_path = Path(path)
    if not file_path.is_file():
        raise FileNotFoundError(f"File non trovato: {file_path}")
    try:
        with file_path.open("r", encoding="utf-8") as handle:
            data = json.load(handle)
    except json.JSONDecodeError as exc:
        raise RunConfigError(f"{file_path.name}:{exc.lineno}: JSON non valido ({exc.msg})") from exc
    if not isinstance(data, dict):
        raise RunConfigError(f"{file_path.name}: atteso un oggetto JSON")
    return data


def load_factors_file(path: Path | str) -> Dict[str, Any]:
    """factors.json: {"M", "h", "kappa"} più eventuali "rho_rF" e statistiche del fit."""
    data = _read_json(path)
    if "M" not in data:
        raise RunConfigError(f"{Path(path).name}: campo 'M' mancante")
    return data


def load_run_config(path: Path | str, overrides: Optional[Mapping[str, Any]] = None) -> RunConfig:
    """I percorsi in config.json sono relativi alla cartella del file stesso."""
    file_path = Path(path)
    data = _read_json(file_path)
    return RunConfig.from_mapping(data, base_dir=file_path.resolve().parent, overrides=overrides)
