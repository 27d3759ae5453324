"""
Modelli per la calibrazione delle correlazioni: matrice di mercato e risultato PCA.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .curve import _frozen_array
from .errors import MarketDataError

PSD_TOLERANCE = 1e-8


@dataclass(frozen=True, eq=False)
class CorrelationMatrix:
    """Correlazioni a coppie tra i bucket di scadenza T_1..T_I."""

    tenors: np.ndarray
    matrix: np.ndarray

    def __post_init__(self) -> None:
        tenors = _frozen_array(self.tenors)
        matrix = _frozen_array(self.matrix)
        object.__setattr__(self, "tenors", tenors)
        object.__setattr__(self, "matrix", matrix)
        n = tenors.size
        if matrix.shape != (n, n):
            raise MarketDataError("Matrice di correlazione con dimensioni errate")
        if not np.allclose(matrix, matrix.T, atol=1e-12):
            raise MarketDataError("Matrice di correlazione non simmetrica")
        if not np.allclose(np.diag(matrix), 1.0, atol=1e-12):
            raise MarketDataError("Diagonale della matrice di correlazione diversa da 1")
        if np.any(np.abs(matrix) > 1.0 + 1e-12):
            raise MarketDataError("Correlazioni fuori da [-1, 1]")
        if np.linalg.eigvalsh(matrix).min() < -PSD_TOLERANCE:
            raise MarketDataError("Matrice di correlazione non semidefinita positiva")

    @property
    def size(self) -> int:
        return int(self.tenors.size)


@dataclass(frozen=True, eq=False)
class PcaResult:
    """Autovalori decrescenti, autovettori in colonna e frazioni cumulate di varianza."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    explained_fractions: np.ndarray

    @property
    def individual_fractions(self) -> np.ndarray:
        return np.diff(np.concatenate([[0.0], self.explained_fractions]))
