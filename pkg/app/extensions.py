"""
Estensioni condivise del toolkit: logging JSON strutturato.
"""

import json
import logging
import os
from datetime import datetime, timezone
from logging.handlers import RotatingFileHandler
from typing import Any, Dict

import numpy as np


_STANDARD_ATTRS = {
    "name", "msg", "args", "levelname", "levelno", "pathname", "filename",
    "module", "exc_info", "exc_text", "stack_info", "lineno", "funcName",
    "created", "msecs", "relativeCreated", "thread", "threadName",
    "processName", "process", "taskName",
}


def _json_default(value: Any) -> Any:
    # I risultati numerici arrivano spesso come scalari/array numpy
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, np.ndarray):
        return value.tolist()
    return str(value)


class JsonFormatter(logging.Formatter):
    """
    Formatter che produce una riga JSON per record.

    Campi principali:
    - timestamp: ISO 8601 UTC
    - level, logger, module, message
    - extra: campi passati con extra={...} (parametri di calibrazione, contatori, ...)
    """

    def format(self, record: logging.LogRecord) -> str:
        log_record: Dict[str, Any] = {
            "timestamp": datetime.fromtimestamp(record.created, tz=timezone.utc)
            .isoformat()
            .replace("+00:00", "Z"),
            "level": record.levelname,
            "logger": record.name,
            "module": record.module,
            "message": record.getMessage(),
        }

        if record.exc_info:
            log_record["exc_info"] = self.formatException(record.exc_info)

        extra_fields = {
            key: value
            for key, value in record.__dict__.items()
            if key not in _STANDARD_ATTRS
        }
        if extra_fields:
            log_record["extra"] = extra_fields

        return json.dumps(log_record, ensure_ascii=False, default=_json_default)


def init_logging(config) -> str:
    """
    Configura il logging del processo:

    - handler su file con RotatingFileHandler
    - handler su console (stream)
    - formatter JSON strutturato

    Ritorna il percorso del file di log.
    """
    log_dir = getattr(config, "LOG_DIR")
    log_file_name = getattr(config, "LOG_FILE_NAME", "inflation.log")
    log_level_name = getattr(config, "LOG_LEVEL", "INFO")

    os.makedirs(log_dir, exist_ok=True)
    log_path = os.path.join(log_dir, log_file_name)
    log_level = getattr(logging, str(log_level_name).upper(), logging.INFO)

    root_logger = logging.getLogger()
    root_logger.setLevel(log_level)

    # Evita handler duplicati se init_logging viene chiamata più volte (es. nei test)
    if not getattr(root_logger, "_json_logging_configured", False):
        json_formatter = JsonFormatter()

        file_handler = RotatingFileHandler(
            log_path,
            maxBytes=5 * 1024 * 1024,  # 5 MB
            backupCount=3,
            encoding="utf-8",
        )
        file_handler.setFormatter(json_formatter)

        console_handler = logging.StreamHandler()
        console_handler.setFormatter(json_formatter)

        for handler in list(root_logger.handlers):
            root_logger.removeHandler(handler)
        root_logger.addHandler(file_handler)
        root_logger.addHandler(console_handler)
        root_logger._json_logging_configured = True  # type: ignore[attr-defined]

    for handler in root_logger.handlers:
        handler.setLevel(log_level)

    logging.getLogger(__name__).info(
        "Logging JSON inizializzato.",
        extra={"component": "logging", "log_path": log_path, "level": log_level_name},
    )
    return log_path
