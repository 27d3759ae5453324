"""
Strumenti quotati: swaplet/caplet/floorlet zero-coupon e year-on-year, e quota di prezzo.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .errors import PricingError

INSTRUMENT_KINDS = ("swap", "cap", "floor")


def _check_kind(kind: str) -> str:
    cleaned = (kind or "").strip().lower()
    if cleaned not in INSTRUMENT_KINDS:
        raise PricingError(f"Tipo di strumento non supportato: {kind}")
    return cleaned


@dataclass(frozen=True)
class ZcInstrument:
    """
    Payoff pagato in T~_i: N (I(T_i)/Ī - (1+K̄)^T̄) per lo swap, parte positiva
    (o negativa, floor) per le opzioni. ``tenor`` (anni composti) vale T_i se omesso.
    """

    kind: str
    reset: float
    payment: float
    kbar: float
    reference: float
    notional: float = 1.0
    tenor: Optional[float] = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "kind", _check_kind(self.kind))
        if self.tenor is None:
            object.__setattr__(self, "tenor", float(self.reset))
        if self.notional <= 0.0:
            raise PricingError("Nozionale non positivo")
        if self.reference <= 0.0:
            raise PricingError("Indice di riferimento non positivo")
        if self.kbar <= -1.0:
            raise PricingError("Strike annualizzato K̄ <= -1")
        if self.reset <= 0.0 or self.payment < self.reset:
            raise PricingError("Date dello strumento non ordinate: serve 0 < T_i <= T~_i")

    @property
    def strike_level(self) -> float:
        """Strike contrattuale K = Ī (1 + K̄)^T̄."""
        return self.reference * (1.0 + self.kbar) ** self.tenor


@dataclass(frozen=True)
class YoyInstrument:
    """Swaplet/caplet YoY sul rapporto F_j(T_j)/F_i(T_i), strike K_Y = 1 + K̄_Y, pagato in T_p."""

    kind: str
    first_reset: float
    second_reset: float
    payment: float
    kbar: float
    notional: float = 1.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "kind", _check_kind(self.kind))
        if self.notional <= 0.0:
            raise PricingError("Nozionale non positivo")
        if not 0.0 < self.first_reset < self.second_reset <= self.payment:
            raise PricingError("Date YoY non ordinate: serve T_i < T_j <= T_p")
        if self.strike <= 0.0:
            raise PricingError("Strike YoY K_Y non positivo")

    @property
    def strike(self) -> float:
        return 1.0 + self.kbar


@dataclass(frozen=True)
class PriceQuote:
    value: float
    stderr: float = 0.0
    method: str = "analytic"

    def __post_init__(self) -> None:
        if not self.stderr >= 0.0:
            raise PricingError("Errore standard negativo")

    @property
    def band(self) -> tuple:
        """Intervallo a due errori standard."""
        return self.value - 2.0 * self.stderr, self.value + 2.0 * self.stderr
