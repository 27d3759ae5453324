"""
Eccezioni di dominio sollevate dalla validazione dei modelli.
"""


class MarketDataError(ValueError):
    """Dato di mercato non valido (schema, ordinamento, valori fuori dominio)."""


class ExtrapolationError(MarketDataError):
    """Richiesta fuori dal dominio coperto dai dati (es. oltre l'ultimo pilastro)."""


class G1ppError(ValueError):
    """Parametri o richieste non validi per il modello a tasso breve G1++."""


class FactorModelError(ValueError):
    """Parametri non validi per la struttura multi-fattore delle loading."""


class InvalidCorrelationError(ValueError):
    """Correlazioni tasso/inflazione non ammissibili (somma dei quadrati > 1)."""


class CorrelationDataError(ValueError):
    """Serie storica insufficiente o degenere per stimare le correlazioni."""


class PricingError(ValueError):
    """Strumento non valido o prezzo fuori dalla banda di non arbitraggio."""


class SimulationError(RuntimeError):
    """Fallimento numerico della simulazione Monte Carlo."""


class LeverageCalibrationError(RuntimeError):
    """Fallimento del bootstrap della leverage function."""
