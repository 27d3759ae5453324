"""Helper per logging strutturato JSON nei servizi di calcolo."""

from __future__ import annotations

import logging
import math
from typing import Any, Dict, List, Optional

import numpy as np

# Chiavi che LogRecord non accetta in ``extra`` (KeyError in makeRecord)
_RESERVED = frozenset(logging.LogRecord("", 0, "", 0, "", (), None).__dict__) | {"message", "asctime"}


def _plain(value: Any) -> Any:
    if isinstance(value, np.generic):
        return value.item()
    return value


def log_structured_event(
    action: str,
    *,
    message: Optional[str] = None,
    level: str = "info",
    logger_name: Optional[str] = None,
    **fields: Any,
) -> None:
    """Registra un evento di calcolo con i suoi campi numerici.

    Eventi tipici: floor applicati in una slice di leverage
    (``leverage_floor_applied``), esito del fit multi-start
    (``factor_fit_completed``), path Monte Carlo esclusi (``mc_invalid_paths``),
    varianza YoY degenere e riepilogo di ogni comando CLI.

    - scalari numpy diventano tipi Python;
    - float non finiti (obiettivo NaN, SE infinito) vengono scritti come
      ``null`` e i loro nomi elencati in ``non_finite``: il JSON resta valido;
    - campi con il nome di un attributo di LogRecord (``name``, ``args``,
      ``module``...) prendono il prefisso ``field_`` invece di far perdere l'evento.

    Il formatter JSON è configurato sul root logger da ``app.extensions.init_logging``;
    un errore di logging non interrompe il calcolo.
    """

    logger = logging.getLogger(logger_name)
    log_method = getattr(logger, level.lower(), logger.info)

    payload: Dict[str, Any] = {"action": action}
    non_finite: List[str] = []
    for key, value in fields.items():
        value = _plain(value)
        if isinstance(value, float) and not math.isfinite(value):
            non_finite.append(key)
            value = None
        payload[f"field_{key}" if key in _RESERVED else key] = value
    if non_finite:
        payload["non_finite"] = non_finite

    try:
        log_method(message or "Evento di calcolo", extra=payload)
    except Exception:
        logger.debug("Logging strutturato fallito", exc_info=True)
