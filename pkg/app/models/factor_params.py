"""
Modelli della struttura multi-fattore: parametri delle loading, sigma di Kazziha,
correlazioni tasso/inflazione e parametro del modello semplificato.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence, Tuple

import numpy as np

from .curve import _frozen_array
from .errors import FactorModelError, InvalidCorrelationError

# Numero di parametri h e kappa per numero di fattori
_PARAM_SHAPE = {1: (0, 0), 2: (2, 1), 3: (4, 2)}
CORRELATION_TOLERANCE = 1e-12


@dataclass(frozen=True)
class FactorParams:
    """M in {1, 2, 3}; M=2: {h1, h2, kappa}; M=3: {h1..h4, kappa1, kappa2}."""

    M: int
    h: Tuple[float, ...] = ()
    kappa: Tuple[float, ...] = ()

    def __post_init__(self) -> None:
        if self.M not in _PARAM_SHAPE:
            raise FactorModelError(f"Numero di fattori non supportato: M={self.M}")
        object.__setattr__(self, "h", tuple(float(v) for v in self.h))
        object.__setattr__(self, "kappa", tuple(float(v) for v in self.kappa))
        n_h, n_kappa = _PARAM_SHAPE[self.M]
        if len(self.h) != n_h or len(self.kappa) != n_kappa:
            raise FactorModelError(
                f"M={self.M} richiede {n_h} parametri h e {n_kappa} kappa"
            )
        if any(k <= 0.0 for k in self.kappa):
            raise FactorModelError("I parametri kappa devono essere strettamente positivi")

    @classmethod
    def single(cls) -> "FactorParams":
        return cls(M=1)

    @classmethod
    def from_vector(cls, M: int, vector: Sequence[float]) -> "FactorParams":
        """Ordine dei parametri: h poi kappa (P2 = {h1, h2, k}, P3 = {h1..h4, k1, k2})."""
        n_h, _ = _PARAM_SHAPE[M]
        values = [float(v) for v in vector]
        return cls(M=M, h=tuple(values[:n_h]), kappa=tuple(values[n_h:]))

    def to_vector(self) -> np.ndarray:
        return np.array(self.h + self.kappa, dtype=float)

    @staticmethod
    def vector_size(M: int) -> int:
        return sum(_PARAM_SHAPE[M])

    @staticmethod
    def n_h(M: int) -> int:
        return _PARAM_SHAPE[M][0]


@dataclass(frozen=True, eq=False)
class SigmaVector:
    """Parametri di Kazziha sigma_i > 0, uno per tenor della superficie."""

    resets: np.ndarray
    values: np.ndarray

    def __post_init__(self) -> None:
        resets = _frozen_array(self.resets)
        values = _frozen_array(self.values)
        object.__setattr__(self, "resets", resets)
        object.__setattr__(self, "values", values)
        if resets.shape != values.shape:
            raise FactorModelError("Sigma e tenor disallineati")
        if np.any(values < 0.0):
            raise FactorModelError("Parametri sigma negativi")

    def __len__(self) -> int:
        return int(self.values.size)

    def __getitem__(self, index: int) -> float:
        return float(self.values[index])


@dataclass(frozen=True)
class RateCorrelations:
    """rho_{rF^alpha} per ciascun fattore d'inflazione, con somma dei quadrati <= 1."""

    rho: Tuple[float, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "rho", tuple(float(v) for v in self.rho))
        if not self.rho:
            raise InvalidCorrelationError("Almeno una correlazione tasso/inflazione richiesta")
        if any(abs(v) > 1.0 for v in self.rho):
            raise InvalidCorrelationError("Correlazioni fuori da [-1, 1]")
        if sum(v * v for v in self.rho) > 1.0 + CORRELATION_TOLERANCE:
            raise InvalidCorrelationError(
                "Somma dei quadrati delle correlazioni tasso/inflazione maggiore di 1"
            )

    @classmethod
    def uniform(cls, value: float, M: int) -> "RateCorrelations":
        return cls(rho=(value,) * M)

    @property
    def M(self) -> int:
        return len(self.rho)

    def as_array(self) -> np.ndarray:
        return np.array(self.rho, dtype=float)


@dataclass(frozen=True)
class SimplifiedParams:
    """Cap algoritmico eta del modello semplificato (default 10)."""

    eta: float = 10.0

    def __post_init__(self) -> None:
        if not self.eta > 0.0:
            raise FactorModelError("Il cap eta deve essere positivo")
