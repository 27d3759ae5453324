"""
Modelli del tasso breve gaussiano G1++: r_t = x_t + phi_t.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .curve import _frozen_array
from .errors import G1ppError


@dataclass(frozen=True, eq=False)
class PiecewiseConstant:
    """
    Funzione costante a tratti: ``values[k]`` su (times[k-1], times[k]], con times[-1] = 0
    implicito; oltre l'ultimo nodo resta piatta sull'ultimo valore.
    """

    times: np.ndarray
    values: np.ndarray

    def __post_init__(self) -> None:
        times = _frozen_array(self.times)
        values = _frozen_array(self.values)
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "values", values)
        if times.ndim != 1 or times.shape != values.shape or times.size == 0:
            raise G1ppError("Nodi e valori della funzione a tratti disallineati")
        if times[0] <= 0.0 or np.any(np.diff(times) <= 0.0):
            raise G1ppError("Nodi della funzione a tratti non strettamente crescenti")

    @classmethod
    def constant(cls, value: float) -> "PiecewiseConstant":
        return cls(times=[1.0], values=[value])

    def __call__(self, t):
        idx = np.searchsorted(self.times, np.asarray(t, dtype=float), side="left")
        return self.values[np.minimum(idx, self.values.size - 1)]

    @cached_property
    def _cumulative(self) -> np.ndarray:
        widths = np.diff(np.concatenate([[0.0], self.times]))
        return np.concatenate([[0.0], np.cumsum(widths * self.values)])

    def integral(self, t0, t1):
        """Integrale esatto su [t0, t1]."""
        return self.antiderivative(t1) - self.antiderivative(t0)

    def antiderivative(self, t):
        t = np.asarray(t, dtype=float)
        idx = np.minimum(np.searchsorted(self.times, t, side="left"), self.values.size - 1)
        left = np.where(idx > 0, self.times[np.maximum(idx - 1, 0)], 0.0)
        return self._cumulative[idx] + self.values[idx] * (t - left)

    def breakpoints(self, t0: float, t1: float) -> np.ndarray:
        """Nodi interni a (t0, t1), usati per spezzare le quadrature."""
        inside = self.times[(self.times > t0) & (self.times < t1)]
        return np.asarray(inside)


@dataclass(frozen=True, eq=False)
class G1ppParams:
    """Mean reversion a_t >= 0 e volatilità sigma^r_t, entrambe costanti a tratti."""

    mean_reversion: PiecewiseConstant
    vol: PiecewiseConstant

    def __post_init__(self) -> None:
        if np.any(self.mean_reversion.values < 0.0):
            raise G1ppError("Mean reversion negativa")
        # sigma^r = 0 è ammesso come limite a tassi deterministici
        if np.any(self.vol.values < 0.0):
            raise G1ppError("Volatilità G1++ negativa")

    @classmethod
    def constant(cls, a: float, sigma_r: float) -> "G1ppParams":
        return cls(PiecewiseConstant.constant(a), PiecewiseConstant.constant(sigma_r))

    def breakpoints(self, t0: float, t1: float) -> np.ndarray:
        return np.union1d(
            self.mean_reversion.breakpoints(t0, t1), self.vol.breakpoints(t0, t1)
        )

    @property
    def is_deterministic(self) -> bool:
        return bool(np.all(self.vol.values == 0.0))


@dataclass(frozen=True, eq=False)
class ShiftFunction:
    """phi costante sugli intervalli (T_{n-1}, T_n] dei pilastri della curva."""

    pillars: np.ndarray
    values: np.ndarray

    def __post_init__(self) -> None:
        pillars = _frozen_array(self.pillars)
        values = _frozen_array(self.values)
        object.__setattr__(self, "pillars", pillars)
        object.__setattr__(self, "values", values)
        if pillars.size != values.size + 1:
            raise G1ppError("La shift function richiede un valore per intervallo di pilastri")

    @cached_property
    def function(self) -> PiecewiseConstant:
        return PiecewiseConstant(self.pillars[1:], self.values)

    @property
    def last_time(self) -> float:
        return float(self.pillars[-1])

    def __call__(self, t):
        return self.function(t)
