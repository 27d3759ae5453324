"""
Modelli della leverage function: superficie L̄_i(y, t) su griglia e stime MC di theta.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence, Tuple

import numpy as np

from .curve import _frozen_array
from .errors import LeverageCalibrationError

# Griglia di strike annualizzati K̄ usata per ogni tenor
KBAR_MIN = -0.02
KBAR_MAX = 0.05
KBAR_STEP = 0.001


def kbar_grid() -> np.ndarray:
    n_points = int(round((KBAR_MAX - KBAR_MIN) / KBAR_STEP)) + 1
    return KBAR_MIN + KBAR_STEP * np.arange(n_points)


@dataclass(frozen=True, eq=False)
class LeverageSurface:
    """
    Una matrice (n_slice, n_y) per tenor, con griglia temporale comune.

    La lettura è bilineare (lineare in y e in t) con estrapolazione piatta in
    entrambe le direzioni: prima della prima slice e dopo l'ultima pubblicata
    vale la slice più vicina.
    """

    resets: np.ndarray
    y_grids: Tuple[np.ndarray, ...]
    times: np.ndarray
    values: Tuple[np.ndarray, ...]

    def __post_init__(self) -> None:
        resets = _frozen_array(self.resets)
        times = _frozen_array(self.times)
        y_grids = tuple(_frozen_array(grid) for grid in self.y_grids)
        values = tuple(_frozen_array(matrix) for matrix in self.values)
        object.__setattr__(self, "resets", resets)
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "y_grids", y_grids)
        object.__setattr__(self, "values", values)

        if len(y_grids) != resets.size or len(values) != resets.size:
            raise LeverageCalibrationError("Una griglia e una matrice per ogni tenor")
        if times.size and np.any(np.diff(times) <= 0.0):
            raise LeverageCalibrationError("Griglia temporale non strettamente crescente")
        for grid, matrix in zip(y_grids, values):
            if np.any(np.diff(grid) <= 0.0):
                raise LeverageCalibrationError("Griglia in y non strettamente crescente")
            if matrix.shape != (times.size, grid.size):
                raise LeverageCalibrationError("Matrice di leverage con dimensioni errate")
            if not np.all(np.isfinite(matrix)) or np.any(matrix <= 0.0):
                raise LeverageCalibrationError("Valori di leverage non finiti o non positivi")

    @classmethod
    def empty(cls, resets: Sequence[float], y_grids: Sequence[np.ndarray]) -> "LeverageSurface":
        return cls(
            resets=np.asarray(resets, dtype=float),
            y_grids=tuple(y_grids),
            times=np.empty(0),
            values=tuple(np.empty((0, len(grid))) for grid in y_grids),
        )

    @property
    def n_slices(self) -> int:
        return int(self.times.size)

    def with_slice(self, t: float, slice_values: Sequence[np.ndarray]) -> "LeverageSurface":
        """Nuovo snapshot con la slice ``t`` aggiunta; la superficie corrente resta invariata."""
        if self.times.size and t <= self.times[-1]:
            raise LeverageCalibrationError(f"Slice t={t:g} non successiva all'ultima pubblicata")
        if len(slice_values) != self.resets.size:
            raise LeverageCalibrationError("Serve una riga di leverage per ogni tenor")
        values = tuple(
            np.vstack([matrix, np.asarray(row, dtype=float)[None, :]])
            for matrix, row in zip(self.values, slice_values)
        )
        return LeverageSurface(self.resets, self.y_grids, np.append(self.times, t), values)

    def slice_values(self, i: int, k: int) -> np.ndarray:
        return self.values[i][k]

    def lookup(self, i: int, y, t: float) -> np.ndarray:
        if self.times.size == 0:
            raise LeverageCalibrationError("Superficie di leverage vuota")
        grid = self.y_grids[i]
        matrix = self.values[i]
        y = np.asarray(y, dtype=float)
        if t <= self.times[0] or self.times.size == 1:
            return np.interp(y, grid, matrix[0])
        if t >= self.times[-1]:
            return np.interp(y, grid, matrix[-1])
        k = int(np.searchsorted(self.times, t, side="right"))
        t0, t1 = self.times[k - 1], self.times[k]
        weight = (t - t0) / (t1 - t0)
        lower = np.interp(y, grid, matrix[k - 1])
        upper = np.interp(y, grid, matrix[k])
        return (1.0 - weight) * lower + weight * upper


@dataclass(frozen=True, eq=False)
class ThetaEstimate:
    """Stima MC del termine theta (cap per y > 0, floor per y <= 0) per ogni strike della griglia."""

    tenor_index: int
    time: float
    y: np.ndarray
    values: np.ndarray
    stderr: np.ndarray

    def __post_init__(self) -> None:
        for name in ("y", "values", "stderr"):
            object.__setattr__(self, name, _frozen_array(getattr(self, name)))
        if not (self.y.shape == self.values.shape == self.stderr.shape):
            raise LeverageCalibrationError("Stima theta con dimensioni incoerenti")
        if not np.all(np.isfinite(self.values)) or not np.all(np.isfinite(self.stderr)):
            raise LeverageCalibrationError("Stima theta non finita")

    @classmethod
    def zero(cls, tenor_index: int, time: float, y: np.ndarray) -> "ThetaEstimate":
        zeros = np.zeros_like(np.asarray(y, dtype=float))
        return cls(tenor_index, time, y, zeros, zeros)
