"""
Motore Monte Carlo: simulazione congiunta nella misura risk-neutral dello stato
del tasso x_t, del fattore di sconto D(t) e di tutti i forward CPI F_i(t).

Schema per sotto-passo:
- x con transizione esatta di Ornstein–Uhlenbeck
- log D con trapezio su x più l'integrale esatto di phi
- log F_i con log-Euler: [nu_i L - 1/2 L^2 zeta_ii] dt + L sum_alpha lambda^alpha dW^alpha
- forward congelati dopo il proprio reset

I path sono divisi in blocchi di dimensione fissa; ogni blocco ha il proprio stream
Philox indicizzato da (seed, blocco, sotto-passo), quindi il risultato non dipende
dal numero di worker.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import cached_property
from typing import Dict, Iterable, List, Optional, Protocol, Sequence, Tuple

import numpy as np
import pandas as pd

from app.models import (
    CpiVolSurface,
    DiscountCurve,
    FactorParams,
    G1ppParams,
    InvalidCorrelationError,
    McConfig,
    PriceQuote,
    RateCorrelations,
    ShiftFunction,
    SigmaVector,
    SimulationError,
    YoyInstrument,
    ZcInstrument,
)
from app.services.factor_service import loadings, nu, zeta
from app.services.g1pp_service import integrated_shift, ou_transition, short_rate, zcb_price
from app.services.logging import log_structured_event
from app.services.market_data_service import discount, tenor_index

logger = logging.getLogger(__name__)

INVALID_PATH_THRESHOLD = 1e-3
TIME_TOLERANCE = 1e-9


# ---------------------------------------------------------------------------
# Modello simulato e correlazioni
# ---------------------------------------------------------------------------
@dataclass(frozen=True, eq=False)
class SimulationModel:
    """Tutti gli input calibrati necessari alla simulazione."""

    curve: DiscountCurve
    g1pp: G1ppParams
    shift: ShiftFunction
    factors: FactorParams
    rates: RateCorrelations
    surface: CpiVolSurface

    def __post_init__(self) -> None:
        if self.rates.M != self.factors.M:
            raise InvalidCorrelationError("Numero di correlazioni tasso/inflazione diverso da M")

    @cached_property
    def resets(self) -> np.ndarray:
        return self.surface.resets

    @cached_property
    def payments(self) -> np.ndarray:
        return self.surface.payments

    @cached_property
    def log_forwards0(self) -> np.ndarray:
        return np.log(self.surface.forwards)


@dataclass(frozen=True, eq=False)
class FactorCholesky:
    """Fattore triangolare inferiore della matrice (M+1)x(M+1) [tasso; fattori inflazione]."""

    lower: np.ndarray
    matrix: np.ndarray


def build_correlation(rc: RateCorrelations) -> FactorCholesky:
    """
    Matrice con fattori d'inflazione indipendenti tra loro e correlati rho_alpha
    col tasso. Cholesky senza pivot che ammette il caso semidefinito (somma rho^2 = 1).
    """
    rho = rc.as_array()
    if np.sum(rho**2) > 1.0 + 1e-12:
        raise InvalidCorrelationError("Somma dei quadrati delle correlazioni maggiore di 1")
    size = rho.size + 1
    matrix = np.eye(size)
    matrix[0, 1:] = rho
    matrix[1:, 0] = rho

    lower = np.zeros_like(matrix)
    for j in range(size):
        diag = matrix[j, j] - np.dot(lower[j, :j], lower[j, :j])
        lower[j, j] = np.sqrt(max(diag, 0.0))
        for r in range(j + 1, size):
            off = matrix[r, j] - np.dot(lower[r, :j], lower[j, :j])
            lower[r, j] = off / lower[j, j] if lower[j, j] > 1e-14 else 0.0
    lower.setflags(write=False)
    matrix.setflags(write=False)
    return FactorCholesky(lower=lower, matrix=matrix)


# ---------------------------------------------------------------------------
# Provider del coefficiente di diffusione
# ---------------------------------------------------------------------------
class DiffusionProvider(Protocol):
    """L_i(F, t) valutato sui path di un blocco (``log_forward`` = log F_i)."""

    def coefficient(self, i: int, log_forward: np.ndarray, t: float) -> np.ndarray:
        ...


class ConstantSigmaProvider:
    """Modello multi-fattore senza smile: L_i = sigma_i."""

    def __init__(self, sigma: SigmaVector):
        self.sigma = sigma

    @classmethod
    def zero(cls, resets: np.ndarray) -> "ConstantSigmaProvider":
        return cls(SigmaVector(resets=resets, values=np.zeros_like(resets, dtype=float)))

    def coefficient(self, i: int, log_forward: np.ndarray, t: float) -> np.ndarray:
        return np.full(log_forward.shape, self.sigma[i])


# ---------------------------------------------------------------------------
# Simulazione
# ---------------------------------------------------------------------------
@dataclass(frozen=True)
class _TenorStep:
    index: int
    drift_nu: float
    loadings: np.ndarray
    zeta: float


@dataclass(frozen=True)
class _SubstepPlan:
    counter: int
    start: float
    dt: float
    mean_factor: float
    ou_std: float
    shift_integral: float
    tenors: Tuple[_TenorStep, ...]


class McSimulation:
    """
    Stato di tutti i path; ``advance_to(t)`` è l'unico punto di avanzamento nel tempo.
    Tra due chiamate il provider può essere sostituito (snapshot della leverage).
    """

    def __init__(self, model: SimulationModel, cfg: McConfig, provider: DiffusionProvider):
        self.model = model
        self.cfg = cfg
        self.provider = provider
        self.chol = build_correlation(model.rates)

        n_paths = cfg.n_paths
        self.t = 0.0
        self.x = np.zeros(n_paths)
        self.log_discount = np.zeros(n_paths)
        self.log_forwards = np.tile(model.log_forwards0, (n_paths, 1))
        self.valid = np.ones(n_paths, dtype=bool)
        self._next_slice = 0
        self.blocks: List[Tuple[int, int]] = [
            (start, min(start + cfg.block_size, n_paths)) for start in range(0, n_paths, cfg.block_size)
        ]

    # --- avanzamento -------------------------------------------------------
    def use_provider(self, provider: DiffusionProvider) -> None:
        self.provider = provider

    def advance_to(self, t: float) -> "McSimulation":
        if t < self.t - TIME_TOLERANCE:
            raise SimulationError(f"Simulazione già oltre t={t:g} (t corrente {self.t:g})")
        target = self.cfg.grid_index(t)
        while self._next_slice <= target:
            self._advance_slice(self._next_slice)
            self._next_slice += 1
        return self

    def _advance_slice(self, k: int) -> None:
        grid = self.cfg.grid
        t0 = float(grid[k - 1]) if k > 0 else 0.0
        t1 = float(grid[k])
        plans = [self._plan(k, s, t0, t1) for s in range(self.cfg.substeps)]

        if self.cfg.workers == 1:
            for index in range(len(self.blocks)):
                self._advance_block(index, plans)
        else:
            with ThreadPoolExecutor(max_workers=self.cfg.workers) as pool:
                list(pool.map(lambda index: self._advance_block(index, plans), range(len(self.blocks))))
        self.t = t1
        self._check_invalid()

    def _plan(self, k: int, s: int, t0: float, t1: float) -> _SubstepPlan:
        model = self.model
        dt = (t1 - t0) / self.cfg.substeps
        start = t0 + s * dt
        end = t1 if s == self.cfg.substeps - 1 else start + dt
        mean_factor, variance = ou_transition(model.g1pp, start, end)
        tenors = []
        for i, (reset, payment) in enumerate(zip(model.resets, model.payments)):
            if reset <= start + TIME_TOLERANCE:
                continue
            tenors.append(
                _TenorStep(
                    index=i,
                    drift_nu=nu(model.factors, model.rates, model.g1pp, payment, reset, start),
                    loadings=loadings(model.factors, reset, start),
                    zeta=zeta(model.factors, reset, reset, start),
                )
            )
        return _SubstepPlan(
            counter=k * self.cfg.substeps + s,
            start=start,
            dt=end - start,
            mean_factor=mean_factor,
            ou_std=float(np.sqrt(max(variance, 0.0))),
            shift_integral=integrated_shift(model.shift, start, end),
            tenors=tuple(tenors),
        )

    def _normals(self, block_index: int, counter: int, n_rows: int) -> np.ndarray:
        stream = np.random.Generator(
            np.random.Philox(np.random.SeedSequence([self.cfg.seed, block_index, counter]))
        )
        n_factors = self.model.factors.M + 1
        if self.cfg.antithetic:
            half = stream.standard_normal((n_rows // 2, n_factors))
            return np.vstack([half, -half])
        return stream.standard_normal((n_rows, n_factors))

    def _advance_block(self, block_index: int, plans: Sequence[_SubstepPlan]) -> None:
        start, stop = self.blocks[block_index]
        x = self.x[start:stop].copy()
        log_d = self.log_discount[start:stop].copy()
        log_f = self.log_forwards[start:stop].copy()
        lower_t = self.chol.lower.T

        with np.errstate(over="ignore", invalid="ignore"):
            for plan in plans:
                shocks = self._normals(block_index, plan.counter, stop - start) @ lower_t
                x_next = plan.mean_factor * x + plan.ou_std * shocks[:, 0]
                log_d -= 0.5 * (x + x_next) * plan.dt + plan.shift_integral
                sqrt_dt = np.sqrt(plan.dt)
                for step in plan.tenors:
                    lev = self.provider.coefficient(step.index, log_f[:, step.index], plan.start)
                    drift = (step.drift_nu * lev - 0.5 * lev**2 * step.zeta) * plan.dt
                    log_f[:, step.index] += drift + lev * sqrt_dt * (shocks[:, 1:] @ step.loadings)
                x = x_next

        self.x[start:stop] = x
        self.log_discount[start:stop] = log_d
        self.log_forwards[start:stop] = log_f

    def _check_invalid(self) -> None:
        finite = (
            np.isfinite(self.x)
            & np.isfinite(self.log_discount)
            & np.all(np.isfinite(self.log_forwards), axis=1)
        )
        newly_invalid = self.valid & ~finite
        if newly_invalid.any():
            self.valid &= finite
            # Stato azzerato: i path esclusi non devono propagare NaN nei provider
            self.x[~finite] = 0.0
            self.log_discount[~finite] = 0.0
            self.log_forwards[~finite] = self.model.log_forwards0
            n_invalid = int((~self.valid).sum())
            log_structured_event(
                "mc_invalid_paths",
                message="Path non finiti esclusi dalla simulazione",
                level="warning",
                logger_name=__name__,
                t=self.t,
                invalid=n_invalid,
                paths=self.cfg.n_paths,
            )
            if n_invalid > INVALID_PATH_THRESHOLD * self.cfg.n_paths:
                raise SimulationError(
                    f"{n_invalid} path non validi su {self.cfg.n_paths} (soglia {INVALID_PATH_THRESHOLD:.1%})"
                )

    # --- osservabili --------------------------------------------------------
    def forwards(self, i: int) -> np.ndarray:
        return np.exp(self.log_forwards[:, i])

    @property
    def discount(self) -> np.ndarray:
        return np.exp(self.log_discount)

    @property
    def short_rate(self) -> np.ndarray:
        return short_rate(self.model.shift, self.t, self.x)

    def discount_to(self, T: float) -> np.ndarray:
        """D(T) per T >= t: D(t) P(t, T; x_t) per la proprietà della torre."""
        if T < self.t - TIME_TOLERANCE:
            raise SimulationError(f"Pagamento T={T:g} già superato dalla simulazione")
        if T <= self.t + TIME_TOLERANCE:
            return self.discount
        return self.discount * zcb_price(self.model.g1pp, self.model.shift, self.t, self.x, T)

    def estimate(self, samples: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """Media ed errore standard sui path validi (coppie antitetiche mediate)."""
        return mean_and_stderr(samples, self.valid, self.blocks, self.cfg.antithetic)


def mean_and_stderr(
    samples: np.ndarray,
    valid: np.ndarray,
    blocks: Sequence[Tuple[int, int]],
    antithetic: bool,
) -> Tuple[np.ndarray, np.ndarray]:
    samples = np.asarray(samples, dtype=float)
    if antithetic:
        first = np.concatenate([np.arange(a, a + (b - a) // 2) for a, b in blocks])
        second = np.concatenate([np.arange(a + (b - a) // 2, b) for a, b in blocks])
        keep = valid[first] & valid[second]
        values = 0.5 * (samples[first[keep]] + samples[second[keep]])
    else:
        values = samples[valid]
    count = values.shape[0]
    if count == 0:
        raise SimulationError("Nessun path valido per la stima")
    mean = values.mean(axis=0)
    stderr = values.std(axis=0, ddof=1) / np.sqrt(count) if count > 1 else np.zeros_like(mean)
    return mean, stderr


# ---------------------------------------------------------------------------
# Pricing
# ---------------------------------------------------------------------------
def _option_payoff(kind: str, underlying: np.ndarray, strike: float) -> np.ndarray:
    if kind == "cap":
        return np.maximum(underlying - strike, 0.0)
    if kind == "floor":
        return np.maximum(strike - underlying, 0.0)
    return underlying - strike


def price_zc_options_mc(
    instruments: Sequence[ZcInstrument],
    model: SimulationModel,
    cfg: McConfig,
    provider: DiffusionProvider,
) -> List[PriceQuote]:
    """
    Prezzi MC di più strumenti ZC da una sola simulazione: payoff
    N (F_i(T_i) - K)^± scontato con D(T~_i).
    """
    sim = McSimulation(model, cfg, provider)
    quotes: Dict[int, PriceQuote] = {}
    order = sorted(range(len(instruments)), key=lambda n: instruments[n].reset)
    for n in order:
        inst = instruments[n]
        i = tenor_index(model.surface, inst.reset)
        sim.advance_to(inst.reset)
        payoff = inst.notional * _option_payoff(inst.kind, sim.forwards(i), inst.strike_level)
        mean, stderr = sim.estimate(sim.discount_to(inst.payment) * payoff)
        quotes[n] = PriceQuote(value=float(mean), stderr=float(stderr), method="mc")
    return [quotes[n] for n in range(len(instruments))]


def price_zc_option_mc(inst: ZcInstrument, model: SimulationModel, cfg: McConfig, provider: DiffusionProvider) -> PriceQuote:
    return price_zc_options_mc([inst], model, cfg, provider)[0]


def price_yoy_options_mc(
    instruments: Sequence[YoyInstrument],
    model: SimulationModel,
    cfg: McConfig,
    provider: DiffusionProvider,
) -> List[PriceQuote]:
    """Payoff N (F_j(T_j)/F_i(T_i) - K_Y)^± pagato in T_p; F_i è congelato dopo T_i."""
    sim = McSimulation(model, cfg, provider)
    quotes: Dict[int, PriceQuote] = {}
    order = sorted(range(len(instruments)), key=lambda n: instruments[n].second_reset)
    for n in order:
        inst = instruments[n]
        i = tenor_index(model.surface, inst.first_reset)
        j = tenor_index(model.surface, inst.second_reset)
        sim.advance_to(inst.second_reset)
        ratio = np.exp(sim.log_forwards[:, j] - sim.log_forwards[:, i])
        payoff = inst.notional * _option_payoff(inst.kind, ratio, inst.strike)
        mean, stderr = sim.estimate(sim.discount_to(inst.payment) * payoff)
        quotes[n] = PriceQuote(value=float(mean), stderr=float(stderr), method="mc")
    return [quotes[n] for n in range(len(instruments))]


def price_yoy_option_mc(inst: YoyInstrument, model: SimulationModel, cfg: McConfig, provider: DiffusionProvider) -> PriceQuote:
    return price_yoy_options_mc([inst], model, cfg, provider)[0]


def martingale_check(
    model: SimulationModel,
    cfg: McConfig,
    times: Iterable[float],
    provider: Optional[DiffusionProvider] = None,
) -> pd.DataFrame:
    """E^Q[D(T)] contro P(0, T) con errore standard e z-score."""
    provider = provider or ConstantSigmaProvider.zero(model.resets)
    sim = McSimulation(model, cfg, provider)
    rows = []
    for T in sorted(float(t) for t in times):
        sim.advance_to(T)
        mean, stderr = sim.estimate(sim.discount)
        market = discount(model.curve, T)
        rows.append(
            {
                "T": T,
                "mc_discount": float(mean),
                "stderr": float(stderr),
                "market_discount": market,
                "z_score": (float(mean) - market) / float(stderr) if stderr > 0 else 0.0,
            }
        )
    return pd.DataFrame(rows, columns=["T", "mc_discount", "stderr", "market_discount", "z_score"])
