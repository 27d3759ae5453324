"""
Calibrazione delle correlazioni: correlazioni storiche di mercato, PCA
diagnostica e fit dei parametri delle loading via minimi quadrati.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np
import pandas as pd
from scipy.linalg import eigh
from scipy.optimize import minimize

from app.models import (
    CorrelationDataError,
    CorrelationMatrix,
    FactorModelError,
    FactorParams,
    HistoricalSeries,
    PcaResult,
)
from app.services.factor_service import inst_correlation, loadings
from app.services.logging import log_structured_event

logger = logging.getLogger(__name__)

MIN_HISTORY_ROWS = 60

# Politica dell'ottimizzatore
N_STARTS = 8
H_START_RANGE = (-5.0, 5.0)
KAPPA_START_RANGE = (0.01, 0.5)
KAPPA_LOWER_BOUND = 1e-4
GRADIENT_STEP = 1e-6
FTOL = 1e-12
GTOL = 1e-8
MAX_ITERATIONS = 500
DEFAULT_FIT_SEED = 20230428


@dataclass(frozen=True)
class StartResult:
    start: Tuple[float, ...]
    params: Tuple[float, ...]
    objective: float
    converged: bool
    iterations: int
    message: str


@dataclass(frozen=True)
class FactorFitResult:
    """Esito del fit: parametri migliori, J*, flag di convergenza e dettaglio per start."""

    params: FactorParams
    objective: float
    converged: bool
    starts: List[StartResult] = field(default_factory=list)

    @property
    def warning(self) -> bool:
        return not self.converged


# ---------------------------------------------------------------------------
# Correlazioni di mercato e PCA
# ---------------------------------------------------------------------------
def _daily_changes(history: HistoricalSeries) -> np.ndarray:
    if history.n_rows < MIN_HISTORY_ROWS:
        raise CorrelationDataError(
            f"Servono almeno {MIN_HISTORY_ROWS} righe storiche utilizzabili, trovate {history.n_rows}"
        )
    changes = history.daily_changes()
    std = changes.std(axis=0)
    constant = np.flatnonzero(std == 0.0)
    if constant.size:
        raise CorrelationDataError(
            f"Bucket con varianza nulla: T={history.tenors[constant[0]]:g}"
        )
    return changes


def market_correlations(history: HistoricalSeries) -> CorrelationMatrix:
    """Correlazioni di Pearson delle variazioni giornaliere di X_k = log F_k."""
    changes = _daily_changes(history)
    matrix = np.corrcoef(changes, rowvar=False)
    matrix = np.atleast_2d(matrix)
    matrix = np.clip(0.5 * (matrix + matrix.T), -1.0, 1.0)
    np.fill_diagonal(matrix, 1.0)
    return CorrelationMatrix(tenors=history.tenors, matrix=matrix)


def pca(history: HistoricalSeries) -> PcaResult:
    """
    Decomposizione spettrale della covarianza delle variazioni giornaliere.
    Convenzione di segno: la componente di modulo massimo di ogni autovettore è positiva.
    """
    changes = _daily_changes(history)
    covariance = np.atleast_2d(np.cov(changes, rowvar=False))
    eigenvalues, eigenvectors = eigh(covariance)
    order = np.argsort(eigenvalues)[::-1]
    eigenvalues = np.clip(eigenvalues[order], 0.0, None)
    eigenvectors = eigenvectors[:, order]

    pivots = np.argmax(np.abs(eigenvectors), axis=0)
    signs = np.sign(eigenvectors[pivots, np.arange(eigenvectors.shape[1])])
    eigenvectors = eigenvectors * np.where(signs == 0.0, 1.0, signs)

    fractions = np.cumsum(eigenvalues) / eigenvalues.sum()
    fractions[-1] = 1.0
    return PcaResult(eigenvalues=eigenvalues, eigenvectors=eigenvectors, explained_fractions=fractions)


# ---------------------------------------------------------------------------
# Fit dei parametri delle loading
# ---------------------------------------------------------------------------
def model_correlation_matrix(p: FactorParams, tenors: np.ndarray, t: float = 0.0) -> np.ndarray:
    """Matrice rho^M(t, T_j, T_k) sui bucket."""
    lam = np.array([loadings(p, T, t) for T in tenors])  # (I, M)
    z = lam @ lam.T
    norm = np.sqrt(np.diag(z))
    return np.clip(z / np.outer(norm, norm), -1.0, 1.0)


def correlation_objective(p: FactorParams, target: CorrelationMatrix) -> float:
    """J = sum_{j <= k} [rho^M(0, T_j, T_k) - rho_market(T_j, T_k)]^2."""
    model = model_correlation_matrix(p, target.tenors)
    upper = np.triu_indices(target.size)
    return float(np.sum((model[upper] - target.matrix[upper]) ** 2))


def correlation_table(p: FactorParams, target: CorrelationMatrix) -> pd.DataFrame:
    """Tabella modello vs mercato per ogni coppia j <= k (dati del grafico di confronto)."""
    rows = []
    for j, T_j in enumerate(target.tenors):
        for k in range(j, target.size):
            T_k = target.tenors[k]
            rows.append(
                {
                    "Tj": T_j,
                    "Tk": T_k,
                    "market": target.matrix[j, k],
                    "model": inst_correlation(p, T_j, T_k, 0.0),
                }
            )
    return pd.DataFrame(rows, columns=["Tj", "Tk", "market", "model"])


def _bounds(M: int) -> List[Tuple[Optional[float], Optional[float]]]:
    n_h = FactorParams.n_h(M)
    n_kappa = FactorParams.vector_size(M) - n_h
    return [(None, None)] * n_h + [(KAPPA_LOWER_BOUND, None)] * n_kappa


def _central_gradient(func, x: np.ndarray, lower: np.ndarray) -> np.ndarray:
    grad = np.empty_like(x)
    for k in range(x.size):
        step = np.zeros_like(x)
        step[k] = GRADIENT_STEP
        # Vicino al bound su kappa la differenza resta centrata ma spostata nel dominio
        shift = max(0.0, lower[k] + GRADIENT_STEP - x[k])
        forward = x + step
        backward = x - step
        forward[k] += shift
        backward[k] += shift
        grad[k] = (func(forward) - func(backward)) / (2.0 * GRADIENT_STEP)
    return grad


def _run_start(M: int, target: CorrelationMatrix, start: np.ndarray) -> StartResult:
    lower = np.array([b[0] if b[0] is not None else -np.inf for b in _bounds(M)])

    def objective(vector: np.ndarray) -> float:
        return correlation_objective(FactorParams.from_vector(M, vector), target)

    result = minimize(
        objective,
        start,
        jac=lambda v: _central_gradient(objective, v, lower),
        method="L-BFGS-B",
        bounds=_bounds(M),
        options={"ftol": FTOL, "gtol": GTOL, "maxiter": MAX_ITERATIONS},
    )
    # Il migliore tra start e soluzione: J non cresce mai rispetto al punto iniziale
    best_x, best_j = np.asarray(result.x, dtype=float), float(result.fun)
    start_j = objective(start)
    if start_j < best_j:
        best_x, best_j = start, start_j
    return StartResult(
        start=tuple(float(v) for v in start),
        params=tuple(float(v) for v in best_x),
        objective=best_j,
        # status 1 = limite di iterazioni raggiunto
        converged=int(result.status) != 1,
        iterations=int(result.nit),
        message=str(result.message),
    )


def starting_points(M: int, n_starts: int, seed: int) -> np.ndarray:
    """Punti iniziali uniformi: h in [-5, 5], kappa in [0.01, 0.5]."""
    rng = np.random.default_rng(seed)
    n_h = FactorParams.n_h(M)
    n_kappa = FactorParams.vector_size(M) - n_h
    h = rng.uniform(*H_START_RANGE, size=(n_starts, n_h))
    kappa = rng.uniform(*KAPPA_START_RANGE, size=(n_starts, n_kappa))
    return np.hstack([h, kappa])


def fit_factor_params(
    target: CorrelationMatrix,
    M: int,
    *,
    n_starts: int = N_STARTS,
    seed: int = DEFAULT_FIT_SEED,
    workers: int = 1,
) -> FactorFitResult:
    """
    Minimizza J con L-BFGS-B (bound kappa > 0, gradiente centrato) da ``n_starts``
    punti iniziali; il migliore è scelto per (J, parametri in ordine lessicografico).
    """
    if M not in (2, 3):
        raise FactorModelError(f"Il fit delle correlazioni richiede M in {{2, 3}}, ricevuto {M}")
    if n_starts < 1:
        raise FactorModelError("Serve almeno un punto iniziale")

    starts = starting_points(M, n_starts, seed)
    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        results = list(pool.map(lambda s: _run_start(M, target, s), starts))

    best = min(results, key=lambda r: (r.objective, r.params))
    params = FactorParams.from_vector(M, best.params)
    fit = FactorFitResult(params=params, objective=best.objective, converged=best.converged, starts=results)

    log_structured_event(
        "factor_fit_completed",
        message="Fit dei parametri delle loading completato",
        level="info" if fit.converged else "warning",
        logger_name=__name__,
        factors=M,
        objective=fit.objective,
        converged=fit.converged,
        params=list(best.params),
        n_starts=n_starts,
    )
    return fit


# ---------------------------------------------------------------------------
# Serie sintetiche
# ---------------------------------------------------------------------------
def synthetic_history(
    p: FactorParams,
    tenors: np.ndarray,
    log_levels0: np.ndarray,
    *,
    n_days: int = 500,
    daily_vol: float = 0.012 / np.sqrt(252.0),
    seed: int = DEFAULT_FIT_SEED,
    start: str = "2021-01-04",
) -> HistoricalSeries:
    """
    Serie a scadenza costante generata dal modello a M fattori: le variazioni
    giornaliere hanno correlazione esatta rho^M(0, T_j, T_k).
    """
    tenors = np.asarray(tenors, dtype=float)
    lam = np.column_stack([loadings(p, T, 0.0) for T in tenors])
    scale = daily_vol / np.sqrt(np.sum(lam**2, axis=0))
    shocks = np.random.default_rng(seed).standard_normal((n_days - 1, p.M))
    changes = (shocks @ lam) * scale
    levels = np.asarray(log_levels0, dtype=float) + np.vstack([np.zeros(tenors.size), np.cumsum(changes, axis=0)])
    dates = pd.bdate_range(start=start, periods=n_days).to_numpy(dtype="datetime64[D]")
    return HistoricalSeries(dates=dates, tenors=tenors, log_levels=levels)
