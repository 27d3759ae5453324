"""DTO per servizi applicativi."""

from .run_config import MODEL_CHOICES, MonteCarloSettings, RunConfig, RunConfigError, YoySettings

__all__ = ["MODEL_CHOICES", "MonteCarloSettings", "RunConfig", "RunConfigError", "YoySettings"]
