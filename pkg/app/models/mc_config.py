"""
Configurazione della simulazione Monte Carlo e griglia temporale delle slice.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from .curve import _frozen_array
from .errors import SimulationError

GRID_TOLERANCE = 1e-9


def build_slice_grid(slice_dt: float, fixings: Iterable[float], horizon: float | None = None) -> np.ndarray:
    """Griglia uniforme di passo ``slice_dt`` più i tempi di fixing quotati, fino all'orizzonte."""
    fixings = np.asarray(sorted(float(t) for t in fixings), dtype=float)
    if slice_dt <= 0.0:
        raise SimulationError("Passo delle slice non positivo")
    end = float(horizon if horizon is not None else fixings.max())
    n_steps = int(np.floor(end / slice_dt + GRID_TOLERANCE))
    uniform = slice_dt * np.arange(1, n_steps + 1)
    grid = np.concatenate([uniform, fixings[fixings <= end + GRID_TOLERANCE]])
    grid = np.sort(grid)
    keep = np.concatenate([[True], np.diff(grid) > GRID_TOLERANCE])
    return grid[keep]


@dataclass(frozen=True, eq=False)
class McConfig:
    """Numero di path, seed, griglia delle slice, sotto-passi per slice, antitetiche."""

    n_paths: int
    seed: int
    grid: np.ndarray
    substeps: int = 3
    antithetic: bool = False
    block_size: int = 256
    workers: int = 1
    fixings: np.ndarray = field(default_factory=lambda: np.empty(0))

    def __post_init__(self) -> None:
        grid = _frozen_array(self.grid)
        fixings = _frozen_array(self.fixings)
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "fixings", fixings)
        if self.n_paths < 2:
            raise SimulationError("Servono almeno due path")
        if self.antithetic and self.n_paths % 2:
            raise SimulationError("Con le variabili antitetiche il numero di path deve essere pari")
        if self.substeps < 1:
            raise SimulationError("Servono almeno un sotto-passo per slice")
        if self.block_size < 2 or self.block_size % 2:
            raise SimulationError("La dimensione dei blocchi deve essere pari e >= 2")
        if self.workers < 1:
            raise SimulationError("Numero di worker non valido")
        if grid.size == 0 or grid[0] <= 0.0 or np.any(np.diff(grid) <= 0.0):
            raise SimulationError("La griglia deve partire dopo 0 ed essere strettamente crescente")
        for fixing in fixings:
            if not self.on_grid(fixing):
                raise SimulationError(f"La griglia non contiene il fixing T={fixing:g}")

    @classmethod
    def build(
        cls,
        *,
        n_paths: int,
        seed: int,
        fixings: Iterable[float],
        slice_dt: float = 0.25,
        substeps: int = 3,
        antithetic: bool = False,
        block_size: int = 256,
        workers: int = 1,
        horizon: float | None = None,
    ) -> "McConfig":
        fixings = np.asarray(sorted(float(t) for t in fixings), dtype=float)
        return cls(
            n_paths=n_paths,
            seed=seed,
            grid=build_slice_grid(slice_dt, fixings, horizon),
            substeps=substeps,
            antithetic=antithetic,
            block_size=block_size,
            workers=workers,
            fixings=fixings,
        )

    def on_grid(self, t: float) -> bool:
        return bool(np.any(np.abs(self.grid - t) <= GRID_TOLERANCE))

    def grid_index(self, t: float) -> int:
        hits = np.flatnonzero(np.abs(self.grid - t) <= GRID_TOLERANCE)
        if hits.size == 0:
            raise SimulationError(f"Il tempo T={t:g} non è sulla griglia di simulazione")
        return int(hits[0])

    @property
    def horizon(self) -> float:
        return float(self.grid[-1])
