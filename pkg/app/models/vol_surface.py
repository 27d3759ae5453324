"""
Modelli della superficie di volatilità CPI.

- CpiTenor: un sottostante F_i con la sua smile quotata Sigma_i(K)
- CpiVolSurface: l'insieme dei tenor quotati (Tabella di mercato)
- Smile: interpolante in strike con estrapolazione piatta
- TotalVarianceSurface: w_i(y, T) = Sigma_i(F_i0 e^y)^2 T
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Optional, Tuple

import numpy as np
from scipy.interpolate import CubicSpline, PchipInterpolator

from .curve import _frozen_array
from .errors import MarketDataError

SMILE_METHODS = ("natural", "not-a-knot", "pchip")
DEFAULT_SMILE_METHOD = "natural"


class Smile:
    """
    Interpolante della smile Sigma(K).

    Esatto sui quotati, piatto (derivate nulle) fuori dall'intervallo quotato.
    ``natural`` e ``not-a-knot`` sono spline cubiche C2 (derivata seconda
    continua sui nodi, pendenze agli estremi libere); ``pchip`` è la cubica
    monotona, solo C1: la derivata seconda salta sui nodi quotati.
    """

    def __init__(self, strikes: np.ndarray, vols: np.ndarray, method: str = DEFAULT_SMILE_METHOD):
        if method not in SMILE_METHODS:
            raise MarketDataError(f"Metodo di interpolazione smile non supportato: {method}")
        self.strikes = np.asarray(strikes, dtype=float)
        self.vols = np.asarray(vols, dtype=float)
        self.method = method
        self._k_min = float(self.strikes[0])
        self._k_max = float(self.strikes[-1])

        if self.strikes.size == 1:
            self._curves = None
            return
        if method == "pchip":
            base = PchipInterpolator(self.strikes, self.vols, extrapolate=True)
        else:
            base = CubicSpline(self.strikes, self.vols, bc_type=method)
        self._curves = (base, base.derivative(1), base.derivative(2))

    def __call__(self, strike, nu: int = 0):
        """Valuta Sigma (nu=0) o la sua derivata nu-esima in K (nu=1, 2)."""
        k = np.asarray(strike, dtype=float)
        if self._curves is None:
            if nu == 0:
                return np.full_like(k, self.vols[0])
            return np.zeros_like(k)

        clipped = np.clip(k, self._k_min, self._k_max)
        values = self._curves[nu](clipped)
        if nu > 0:
            values = np.where((k < self._k_min) | (k > self._k_max), 0.0, values)
        return values


@dataclass(frozen=True, eq=False)
class CpiTenor:
    """Sottostante F_i: reset T_i, pagamento T~_i, forward F_i(0) e smile quotata."""

    reset: float
    payment: float
    forward: float
    kbar: np.ndarray
    vols: np.ndarray

    def __post_init__(self) -> None:
        kbar = _frozen_array(self.kbar)
        vols = _frozen_array(self.vols)
        object.__setattr__(self, "kbar", kbar)
        object.__setattr__(self, "vols", vols)
        object.__setattr__(self, "reset", float(self.reset))
        object.__setattr__(self, "payment", float(self.payment))
        object.__setattr__(self, "forward", float(self.forward))

        if kbar.size == 0:
            raise MarketDataError(f"Smile vuota per il tenor T={self.reset:g}")
        if kbar.shape != vols.shape:
            raise MarketDataError(f"Strike e volatilità disallineati per T={self.reset:g}")
        if self.reset <= 0.0:
            raise MarketDataError("Il reset del tenor deve essere positivo")
        if self.payment < self.reset:
            raise MarketDataError(f"Pagamento precedente al reset per T={self.reset:g}")
        if self.forward <= 0.0:
            raise MarketDataError(f"Forward CPI non positivo per T={self.reset:g}")
        if np.any(vols <= 0.0):
            raise MarketDataError(f"Volatilità non positive per T={self.reset:g}")
        if np.any(kbar <= -1.0) or np.any(np.diff(kbar) <= 0.0):
            raise MarketDataError(f"Strike non strettamente crescenti per T={self.reset:g}")

    @property
    def strikes(self) -> np.ndarray:
        """Strike contrattuali K = F_i0 (1 + K̄)^T_i."""
        return self.forward * (1.0 + self.kbar) ** self.reset

    @property
    def log_moneyness(self) -> np.ndarray:
        return self.reset * np.log1p(self.kbar)


@dataclass(frozen=True, eq=False)
class CpiVolSurface:
    """Superficie quotata: tenor ordinati per reset, indice di riferimento opzionale."""

    tenors: Tuple[CpiTenor, ...]
    reference_index: Optional[float] = None
    interpolation: str = DEFAULT_SMILE_METHOD

    def __post_init__(self) -> None:
        tenors = tuple(self.tenors)
        object.__setattr__(self, "tenors", tenors)
        if not tenors:
            raise MarketDataError("Superficie di volatilità senza tenor")
        resets = np.array([tenor.reset for tenor in tenors])
        if np.any(np.diff(resets) <= 0.0):
            raise MarketDataError("Tenor non strettamente crescenti")
        if self.interpolation not in SMILE_METHODS:
            raise MarketDataError(f"Metodo di interpolazione smile non supportato: {self.interpolation}")
        if self.reference_index is not None and self.reference_index <= 0.0:
            raise MarketDataError("Indice di riferimento non positivo")

    def __len__(self) -> int:
        return len(self.tenors)

    @property
    def resets(self) -> np.ndarray:
        return np.array([tenor.reset for tenor in self.tenors])

    @property
    def payments(self) -> np.ndarray:
        return np.array([tenor.payment for tenor in self.tenors])

    @property
    def forwards(self) -> np.ndarray:
        return np.array([tenor.forward for tenor in self.tenors])

    @cached_property
    def smiles(self) -> Tuple[Smile, ...]:
        return tuple(
            Smile(tenor.strikes, tenor.vols, self.interpolation) for tenor in self.tenors
        )


@dataclass(frozen=True, eq=False)
class TotalVarianceSurface:
    """w_i(y, T) derivata dalla superficie quotata con accumulo lineare nel tempo."""

    surface: CpiVolSurface
    reset_tolerance: float = field(default=1e-9)

    def __len__(self) -> int:
        return len(self.surface)
