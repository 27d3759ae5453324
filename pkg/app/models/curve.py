"""
Modello DiscountCurve: fattori di sconto P(0, T) sui pilastri di mercato.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import MarketDataError


def _frozen_array(values) -> np.ndarray:
    array = np.array(values, dtype=float)
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class DiscountCurve:
    """Pilastri (T, df) in frazioni d'anno; interpolazione log-lineare nel servizio."""

    times: np.ndarray
    discount_factors: np.ndarray

    def __post_init__(self) -> None:
        times = _frozen_array(self.times)
        dfs = _frozen_array(self.discount_factors)
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "discount_factors", dfs)

        if times.ndim != 1 or times.shape != dfs.shape:
            raise MarketDataError("Pilastri e fattori di sconto con dimensioni diverse")
        if times.size < 2:
            raise MarketDataError("La curva richiede almeno due pilastri")
        if times[0] != 0.0 or dfs[0] != 1.0:
            raise MarketDataError("Il primo pilastro deve essere (0, 1)")
        if np.any(np.diff(times) <= 0.0):
            raise MarketDataError("Tempi dei pilastri non strettamente crescenti")
        if np.any(dfs <= 0.0) or np.any(dfs > 1.0):
            raise MarketDataError("Fattori di sconto fuori da (0, 1]")

    @property
    def last_time(self) -> float:
        return float(self.times[-1])

    @property
    def log_discounts(self) -> np.ndarray:
        return np.log(self.discount_factors)

    @classmethod
    def flat(cls, rate: float, times) -> "DiscountCurve":
        """Curva con tasso continuo costante sui tempi indicati (0 incluso)."""
        grid = np.unique(np.concatenate([[0.0], np.asarray(times, dtype=float)]))
        return cls(times=grid, discount_factors=np.exp(-rate * grid))
