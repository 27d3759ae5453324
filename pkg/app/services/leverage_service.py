"""
Calibrazione della leverage function L̄_i(y, t) slice per slice.

1. prima slice: formula di Dupire a tassi deterministici, senza Monte Carlo;
2. slice successive: simulazione fino a t_k con la leverage della slice
   precedente, stima MC di theta (cap per y > 0, floor per y <= 0) e
   soluzione della Dupire in varianza totale.
"""

from __future__ import annotations

import logging
import time
from dataclasses import asdict, dataclass, field
from typing import Dict, List, Optional

import numpy as np

from app.models import (
    FactorParams,
    LeverageCalibrationError,
    LeverageSurface,
    McConfig,
    ThetaEstimate,
    TotalVarianceSurface,
    kbar_grid,
)
from app.services.analytic_pricing_service import black_price, black_price_w_sensitivity
from app.services.factor_service import nu, zeta
from app.services.logging import log_structured_event
from app.services.market_data_service import discount, instantaneous_forward, total_variance
from app.services.montecarlo_service import McSimulation, SimulationModel

logger = logging.getLogger(__name__)

BRACKET_FLOOR = 1e-4
NEGATIVE_FLOOR_FRACTION = 0.1
# Sotto questa soglia relativa dPrice/dw non è stimabile: si usa la formula deterministica
SENSITIVITY_FLOOR = 1e-10
TIME_TOLERANCE = 1e-9


class LeverageProvider:
    """Provider MC: L_i = L̄_i(log(F/F_i0), t) letto dallo snapshot corrente."""

    def __init__(self, surface: LeverageSurface, log_forwards0: np.ndarray):
        self.surface = surface
        self.log_forwards0 = np.asarray(log_forwards0, dtype=float)

    def coefficient(self, i: int, log_forward: np.ndarray, t: float) -> np.ndarray:
        return self.surface.lookup(i, log_forward - self.log_forwards0[i], t)


@dataclass
class SliceResult:
    values: List[np.ndarray]
    bracket_floors: int = 0
    negative_floors: int = 0
    degenerate_nodes: int = 0


@dataclass(frozen=True)
class SliceReport:
    t: float
    bracket_floors: int
    negative_floors: int
    degenerate_nodes: int
    theta_stderr_max: float


@dataclass
class LeverageCalibration:
    surface: LeverageSurface
    slices: List[SliceReport] = field(default_factory=list)
    runtime_seconds: float = 0.0

    def report(self) -> Dict[str, object]:
        """Riepilogo JSON-serializzabile (contatori di floor per slice, SE di theta, durata)."""
        return {
            "runtime_seconds": self.runtime_seconds,
            "n_slices": len(self.slices),
            "bracket_floors": sum(s.bracket_floors for s in self.slices),
            "negative_floors": sum(s.negative_floors for s in self.slices),
            "degenerate_nodes": sum(s.degenerate_nodes for s in self.slices),
            "slices": [asdict(s) for s in self.slices],
        }


# ---------------------------------------------------------------------------
# Formule di Dupire in varianza totale
# ---------------------------------------------------------------------------
def y_grid(reset: float) -> np.ndarray:
    """y = T_i log(1 + K̄) sulla griglia K̄ in [-0.02, 0.05] passo 0.001."""
    return reset * np.log1p(kbar_grid())


def dupire_bracket(y, w, w_y, w_yy):
    """1 - (y/w) w_y + 1/2 w_yy + 1/4 w_y^2 (-1/4 - 1/w + y^2/w^2)."""
    y = np.asarray(y, dtype=float)
    return 1.0 - (y / w) * w_y + 0.5 * w_yy + 0.25 * w_y**2 * (-0.25 - 1.0 / w + y**2 / w**2)


def _floored_bracket(y, w, w_y, w_yy):
    bracket = dupire_bracket(y, w, w_y, w_yy)
    floored = bracket < BRACKET_FLOOR
    return np.where(floored, BRACKET_FLOOR, bracket), floored


def _bridge_nodes(
    y: np.ndarray, values: np.ndarray, targets: np.ndarray, sources: Optional[np.ndarray] = None
) -> np.ndarray:
    """
    Nodi con bracket al floor: L̄ interpolato linearmente in y dai nodi validi
    della stessa slice (piatto oltre l'ultimo valido). Senza nodi validi resta
    il valore con il floor.
    """
    sources = ~targets if sources is None else sources
    if not targets.any() or not sources.any():
        return values
    return np.where(targets, np.interp(y, y[sources], values[sources]), values)


def first_slice(tiv: TotalVarianceSurface, p: FactorParams, t1: float) -> SliceResult:
    """L̄_i(y, t1)^2 = (dw/dT) / ([bracket] zeta_ii(t1)), senza Monte Carlo."""
    surface = tiv.surface
    if t1 <= 0.0 or t1 > surface.resets.min() + TIME_TOLERANCE:
        raise LeverageCalibrationError("La prima slice richiede 0 < t1 <= min T_i")
    result = SliceResult(values=[])
    for i, tenor in enumerate(surface.tenors):
        y = y_grid(tenor.reset)
        w, w_t, w_y, w_yy = total_variance(tiv, i, y, t1)
        if np.any(w_t <= 0.0):
            raise LeverageCalibrationError(f"dw/dT non positiva per il tenor T={tenor.reset:g}")
        bracket, floored = _floored_bracket(y, w, w_y, w_yy)
        result.bracket_floors += int(floored.sum())
        values = np.sqrt(w_t / (bracket * zeta(p, tenor.reset, tenor.reset, t1)))
        result.values.append(_bridge_nodes(y, values, floored))
    _log_floors(t1, result)
    return result


def theta_estimate(
    sim: McSimulation,
    i: int,
    y: np.ndarray,
    tiv: TotalVarianceSurface,
    *,
    kind: Optional[str] = None,
    notional: float = 1.0,
    settlement: Optional[float] = None,
) -> ThetaEstimate:
    """
    Stima MC di theta al tempo corrente della simulazione T:

    cap:   N E[D(S) {(F - K) r_T - nu_i L_i F} 1{F > K}] - f(0,T) Cap_i(K)
    floor: N E[D(S) {(K - F) r_T + nu_i L_i F} 1{F < K}] - f(0,T) Floor_i(K)

    S è la data di regolamento dell'opzione: per default il pagamento T~_i,
    con D(T~_i) = D(T) P(T, T~_i; x_T); ``settlement=T`` regola a scadenza.
    Cap/Floor sono prezzi di Black dalla varianza totale di mercato scontati a S.
    Senza ``kind`` si usano opzioni out-of-the-money (cap per y > 0).
    """
    model = sim.model
    tenor = model.surface.tenors[i]
    T = sim.t
    settle = tenor.payment if settlement is None else float(settlement)
    y = np.asarray(y, dtype=float)
    is_cap = y > 0.0 if kind is None else np.full(y.shape, kind == "cap")

    log_f = sim.log_forwards[:, i]
    F = np.exp(log_f)[:, None]
    K = tenor.forward * np.exp(y)[None, :]
    deflator = sim.discount_to(settle)[:, None]
    rate = sim.short_rate[:, None]
    lev = sim.provider.coefficient(i, log_f, T)[:, None]
    drift = nu(model.factors, model.rates, model.g1pp, tenor.payment, tenor.reset, T)

    cap_term = ((F - K) * rate - drift * lev * F) * (F > K)
    floor_term = ((K - F) * rate + drift * lev * F) * (F < K)
    samples = deflator * np.where(is_cap[None, :], cap_term, floor_term)
    mean, stderr = sim.estimate(samples)

    w = total_variance(tiv, i, y, T)[0]
    p_settle = discount(model.curve, settle)
    market = np.where(
        is_cap,
        black_price("cap", tenor.forward, K[0], w, p_settle, notional),
        black_price("floor", tenor.forward, K[0], w, p_settle, notional),
    )
    values = notional * mean - instantaneous_forward(model.curve, T) * market
    return ThetaEstimate(tenor_index=i, time=T, y=y, values=values, stderr=notional * stderr)


def slice_calibrate(
    i: int,
    t_k: float,
    tiv: TotalVarianceSurface,
    theta: ThetaEstimate,
    p: FactorParams,
    discount_factor: float,
    previous: np.ndarray,
    *,
    notional: float = 1.0,
) -> SliceResult:
    """
    L̄^2 = (dPrice/dw dw/dT + theta) / (dPrice/dw [bracket] zeta_ii),
    con dPrice/dw = 1/2 N P F_i0 e^y phi(d2) w^{-1/2}; ``discount_factor`` è lo
    sconto alla stessa data di regolamento usata per theta.
    """
    tenor = tiv.surface.tenors[i]
    y = theta.y
    w, w_t, w_y, w_yy = total_variance(tiv, i, y, t_k)
    bracket, floored = _floored_bracket(y, w, w_y, w_yy)
    z = zeta(p, tenor.reset, tenor.reset, t_k)

    sensitivity = black_price_w_sensitivity(tenor.forward, y, w, discount_factor, notional)
    degenerate = sensitivity <= SENSITIVITY_FLOOR * notional * discount_factor * tenor.forward
    correction = np.where(degenerate, 0.0, theta.values / np.where(degenerate, 1.0, sensitivity))
    squared = (w_t + correction) / (bracket * z)

    negative = ~(squared > 0.0)
    squared = np.where(negative, (NEGATIVE_FLOOR_FRACTION * np.asarray(previous)) ** 2, squared)
    values = _bridge_nodes(y, np.sqrt(squared), floored & ~negative, ~(floored | negative))
    return SliceResult(
        values=[values],
        bracket_floors=int(floored.sum()),
        negative_floors=int(negative.sum()),
        degenerate_nodes=int(degenerate.sum()),
    )


def _log_floors(t: float, result: SliceResult) -> None:
    if result.bracket_floors or result.negative_floors:
        log_structured_event(
            "leverage_floor_applied",
            message="Floor applicati nella slice di leverage",
            level="warning",
            logger_name=__name__,
            t=t,
            bracket_floors=result.bracket_floors,
            negative_floors=result.negative_floors,
        )


# ---------------------------------------------------------------------------
# Bootstrap completo
# ---------------------------------------------------------------------------
def calibrate_all(
    model: SimulationModel,
    tiv: TotalVarianceSurface,
    cfg: McConfig,
    *,
    notional: float = 1.0,
) -> LeverageCalibration:
    """
    Bootstrap su tutta la griglia di ``cfg``: ogni slice pubblicata è uno snapshot
    immutabile usato dai path fino alla slice successiva. Oltre il proprio reset
    un tenor mantiene l'ultima slice calibrata.

    L'equazione di Dupire della slice t_k usa il caplet con scadenza e
    regolamento in t_k: theta e dPrice/dw sono scontati con D(t_k) e P(0, t_k).
    Alla slice finale t_k = T_i coincide con l'opzione quotata quando T~_i = T_i.
    """
    started = time.perf_counter()
    surface_model = model.surface
    grid = cfg.grid
    resets = surface_model.resets
    y_grids = [y_grid(reset) for reset in resets]

    first = first_slice(tiv, model.factors, float(grid[0]))
    surface = LeverageSurface.empty(resets, y_grids).with_slice(float(grid[0]), first.values)
    reports = [SliceReport(float(grid[0]), first.bracket_floors, 0, 0, 0.0)]

    sim = McSimulation(model, cfg, LeverageProvider(surface, model.log_forwards0))
    deterministic = model.g1pp.is_deterministic
    for k in range(1, grid.size):
        t_k = float(grid[k])
        sim.advance_to(t_k)
        totals = SliceResult(values=[])
        theta_se = 0.0
        for i, tenor in enumerate(surface_model.tenors):
            previous = surface.slice_values(i, surface.n_slices - 1)
            if t_k > tenor.reset + TIME_TOLERANCE:
                totals.values.append(previous)
                continue
            if deterministic:
                # Con sigma^r = 0 theta è identicamente nullo
                theta = ThetaEstimate.zero(i, t_k, y_grids[i])
            else:
                theta = theta_estimate(sim, i, y_grids[i], tiv, notional=notional, settlement=t_k)
                theta_se = max(theta_se, float(theta.stderr.max()))
            solved = slice_calibrate(
                i, t_k, tiv, theta, model.factors, discount(model.curve, t_k), previous,
                notional=notional,
            )
            totals.values.extend(solved.values)
            totals.bracket_floors += solved.bracket_floors
            totals.negative_floors += solved.negative_floors
            totals.degenerate_nodes += solved.degenerate_nodes

        surface = surface.with_slice(t_k, totals.values)
        sim.use_provider(LeverageProvider(surface, model.log_forwards0))
        reports.append(
            SliceReport(t_k, totals.bracket_floors, totals.negative_floors, totals.degenerate_nodes, theta_se)
        )
        _log_floors(t_k, totals)
        logger.debug("Slice di leverage calibrata", extra={"t": t_k, "theta_stderr_max": theta_se})

    calibration = LeverageCalibration(surface=surface, slices=reports, runtime_seconds=time.perf_counter() - started)
    log_structured_event(
        "leverage_calibrated",
        message="Calibrazione della leverage completata",
        logger_name=__name__,
        slices=surface.n_slices,
        paths=cfg.n_paths,
        runtime_seconds=calibration.runtime_seconds,
        negative_floors=calibration.report()["negative_floors"],
    )
    return calibration
