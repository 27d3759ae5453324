"""
Modello HistoricalSeries: serie storiche giornaliere X_k = log F_k per bucket.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .curve import _frozen_array
from .errors import MarketDataError


@dataclass(frozen=True, eq=False)
class HistoricalSeries:
    """Righe per data lavorativa, colonne per bucket di scadenza (tenor in anni)."""

    dates: np.ndarray
    tenors: np.ndarray
    log_levels: np.ndarray

    def __post_init__(self) -> None:
        dates = np.array(self.dates, dtype="datetime64[D]")
        dates.setflags(write=False)
        tenors = _frozen_array(self.tenors)
        values = _frozen_array(self.log_levels)
        object.__setattr__(self, "dates", dates)
        object.__setattr__(self, "tenors", tenors)
        object.__setattr__(self, "log_levels", values)

        if values.ndim != 2 or values.shape != (dates.size, tenors.size):
            raise MarketDataError("Matrice storica con dimensioni incoerenti")
        if np.any(np.diff(dates.astype("int64")) <= 0):
            raise MarketDataError("Date storiche non strettamente crescenti")
        if np.any(np.diff(tenors) <= 0.0):
            raise MarketDataError("Bucket di scadenza non strettamente crescenti")
        if not np.all(np.isfinite(values)):
            raise MarketDataError("Bucket mancanti all'interno di una riga storica")

    @property
    def n_rows(self) -> int:
        return int(self.dates.size)

    def daily_changes(self) -> np.ndarray:
        """Variazioni giornaliere di log F_k, forma (n_rows - 1, n_bucket)."""
        return np.diff(self.log_levels, axis=0)
