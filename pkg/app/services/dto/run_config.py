"""DTO per la configurazione di un'esecuzione (config.json + override da riga di comando)."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Mapping, Optional, Tuple

from config import Config

MODEL_CHOICES = ("constant", "leveraged", "simplified")
DEFAULT_YOY_KBARS = (-0.02, -0.01, 0.0, 0.01, 0.02, 0.03)


class RunConfigError(ValueError):
    """Configurazione di esecuzione non valida o incoerente."""


@dataclass(frozen=True)
class MonteCarloSettings:
    paths: int = Config.MC_PATHS
    seed: int = Config.MC_SEED
    slice_dt: float = Config.MC_SLICE_DT
    substeps: int = Config.MC_SUBSTEPS
    antithetic: bool = False
    block_size: int = Config.MC_BLOCK_SIZE
    workers: int = Config.MC_WORKERS


@dataclass(frozen=True)
class YoySettings:
    """Caplet YoY da T_i a T_j pagati in T_p; ``sigma_kbars`` sono le moneyness di calibrazione dei sigma."""

    first_reset: float = 1.0
    second_reset: float = 2.0
    payment: float = 2.0
    notional: float = 1000.0
    kbars: Tuple[float, ...] = DEFAULT_YOY_KBARS
    sigma_kbars: Tuple[float, ...] = DEFAULT_YOY_KBARS


@dataclass(frozen=True)
class RunConfig:
    base_dir: Path
    discounts: Path
    vols: Path
    g1pp: Path
    history: Optional[Path] = None
    leverage: Optional[Path] = None
    mean_reversion: float = 0.02
    M: int = 1
    h: Tuple[float, ...] = ()
    kappa: Tuple[float, ...] = ()
    rho: Tuple[float, ...] = (0.0,)
    factor_sets: Dict[int, Dict[str, Tuple[float, ...]]] = field(default_factory=dict)
    model: str = "constant"
    kbar_star: float = 0.0
    eta: float = Config.SIMPLIFIED_ETA
    reference_index: Optional[float] = None
    interpolation: str = Config.SMILE_INTERPOLATION
    monte_carlo: MonteCarloSettings = field(default_factory=MonteCarloSettings)
    yoy: YoySettings = field(default_factory=YoySettings)
    instruments: Tuple[Dict[str, Any], ...] = ()
    output_dir: Path = Path(Config.OUTPUT_DIR)

    # --- parsing ---------------------------------------------------------------
    @staticmethod
    def _path(base_dir: Path, value: Any, *, required: bool, key: str) -> Optional[Path]:
        if value in (None, ""):
            if required:
                raise RunConfigError(f"Percorso mancante per '{key}'")
            return None
        path = Path(str(value))
        if not path.is_absolute():
            path = base_dir / path
        if not path.is_file():
            raise FileNotFoundError(f"File non trovato ({key}): {path}")
        return path

    @staticmethod
    def _floats(value: Any, key: str) -> Tuple[float, ...]:
        if value is None:
            return ()
        if isinstance(value, (int, float)):
            return (float(value),)
        try:
            return tuple(float(v) for v in value)
        except (TypeError, ValueError) as exc:
            raise RunConfigError(f"Valori numerici attesi per '{key}'") from exc

    @classmethod
    def _factor_block(cls, data: Mapping[str, Any]) -> Dict[str, Any]:
        return {
            "M": int(data.get("M", 1)),
            "h": cls._floats(data.get("h"), "h"),
            "kappa": cls._floats(data.get("kappa"), "kappa"),
        }

    @classmethod
    def from_mapping(
        cls,
        data: Mapping[str, Any],
        base_dir: Path | str = ".",
        overrides: Optional[Mapping[str, Any]] = None,
    ) -> "RunConfig":
        """
        Costruisce la configurazione: i percorsi sono relativi a ``base_dir``,
        gli ``overrides`` non nulli (flag CLI) prevalgono sul file.
        """
        base_dir = Path(base_dir)
        overrides = {k: v for k, v in (overrides or {}).items() if v is not None}
        inputs = data.get("inputs", data)

        factors_raw = data.get("factors") or {}
        if isinstance(factors_raw, str):
            # Riferimento al factors.json prodotto da calibrate-correlations
            from app.parsers.config_parser import load_factors_file

            factors_raw = load_factors_file(cls._path(base_dir, factors_raw, required=True, key="factors"))
        factors = cls._factor_block(factors_raw)
        if "M" in overrides and overrides["M"] != factors["M"]:
            factors = {"M": int(overrides["M"]), "h": (), "kappa": ()}
            sets = data.get("factor_sets") or {}
            if str(overrides["M"]) in sets:
                factors = cls._factor_block({**sets[str(overrides["M"])], "M": overrides["M"]})

        rho = cls._floats(factors_raw.get("rho_rF", data.get("rho_rF", 0.0)), "rho_rF")
        if len(rho) != factors["M"] and len(set(rho)) == 1:
            rho = (rho[0],) * factors["M"]

        factor_sets = {
            int(m): cls._factor_block({**block, "M": int(m)})
            for m, block in (data.get("factor_sets") or {}).items()
        }

        mc_raw = dict(data.get("monte_carlo") or {})
        mc = MonteCarloSettings(
            paths=int(overrides.get("paths", mc_raw.get("paths", Config.MC_PATHS))),
            seed=int(overrides.get("seed", mc_raw.get("seed", Config.MC_SEED))),
            slice_dt=float(overrides.get("slice_dt", mc_raw.get("slice_dt", Config.MC_SLICE_DT))),
            substeps=int(overrides.get("substeps", mc_raw.get("substeps", Config.MC_SUBSTEPS))),
            antithetic=bool(overrides.get("antithetic", mc_raw.get("antithetic", False))),
            block_size=int(mc_raw.get("block_size", Config.MC_BLOCK_SIZE)),
            workers=int(overrides.get("workers", mc_raw.get("workers", Config.MC_WORKERS))),
        )

        yoy_raw = dict(data.get("yoy") or {})
        yoy = YoySettings(
            first_reset=float(yoy_raw.get("first_reset", 1.0)),
            second_reset=float(yoy_raw.get("second_reset", 2.0)),
            payment=float(yoy_raw.get("payment", yoy_raw.get("second_reset", 2.0))),
            notional=float(yoy_raw.get("notional", 1000.0)),
            kbars=cls._floats(yoy_raw.get("kbars", DEFAULT_YOY_KBARS), "yoy.kbars"),
            sigma_kbars=cls._floats(yoy_raw.get("sigma_kbars", DEFAULT_YOY_KBARS), "yoy.sigma_kbars"),
        )

        output = overrides.get("out", data.get("output_dir", Config.OUTPUT_DIR))
        output_dir = Path(str(output))
        if not output_dir.is_absolute() and "out" not in overrides:
            output_dir = base_dir / output_dir

        run = cls(
            base_dir=base_dir,
            discounts=cls._path(base_dir, inputs.get("discounts"), required=True, key="discounts"),
            vols=cls._path(base_dir, inputs.get("vols"), required=True, key="vols"),
            g1pp=cls._path(base_dir, inputs.get("g1pp"), required=True, key="g1pp"),
            history=cls._path(
                base_dir, overrides.get("history", inputs.get("history")), required=False, key="history"
            ),
            leverage=cls._path(
                base_dir, overrides.get("leverage", inputs.get("leverage")), required=False, key="leverage"
            ),
            mean_reversion=float(data.get("mean_reversion", 0.02)),
            M=factors["M"],
            h=factors["h"],
            kappa=factors["kappa"],
            rho=rho,
            factor_sets=factor_sets,
            model=str(overrides.get("model", data.get("model", "constant"))).strip().lower(),
            kbar_star=float(data.get("kbar_star", 0.0)),
            eta=float(data.get("eta", Config.SIMPLIFIED_ETA)),
            reference_index=data.get("reference_index"),
            interpolation=str(data.get("interpolation", Config.SMILE_INTERPOLATION)),
            monte_carlo=mc,
            yoy=yoy,
            instruments=tuple(dict(item) for item in data.get("instruments") or ()),
            output_dir=output_dir,
        )
        run.validate()
        return run

    def validate(self) -> None:
        if self.model not in MODEL_CHOICES:
            raise RunConfigError(f"Modello non supportato: {self.model} (ammessi: {', '.join(MODEL_CHOICES)})")
        if self.M not in (1, 2, 3):
            raise RunConfigError(f"Numero di fattori non supportato: M={self.M}")
        if len(self.rho) != self.M:
            raise RunConfigError(f"Servono {self.M} correlazioni rho_rF, trovate {len(self.rho)}")

    def summary(self) -> Dict[str, Any]:
        """Campi principali per i log dei comandi."""
        return {
            "model": self.model,
            "M": self.M,
            "paths": self.monte_carlo.paths,
            "seed": self.monte_carlo.seed,
            "output_dir": str(self.output_dir),
        }
