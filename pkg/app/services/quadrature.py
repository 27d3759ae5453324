"""
Quadratura di Gauss–Legendre a nodi fissi, spezzata sui breakpoint dei parametri.

Tutti gli integrali di prodotti di b(t, T), loading e volatilità costanti a
tratti passano da qui: un solo percorso di integrazione per g1pp, fattori e pricer.
"""

from __future__ import annotations

from functools import lru_cache
from typing import Callable, Iterable, Tuple

import numpy as np

from config import Config

DEFAULT_NODES = Config.QUADRATURE_NODES
MIN_NODES = 16


@lru_cache(maxsize=16)
def gauss_legendre(n_nodes: int) -> Tuple[np.ndarray, np.ndarray]:
    """Nodi e pesi su [-1, 1] (cache per numero di nodi)."""
    nodes, weights = np.polynomial.legendre.leggauss(max(int(n_nodes), MIN_NODES))
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return nodes, weights


def split_interval(t0: float, t1: float, breakpoints: Iterable[float] = ()) -> np.ndarray:
    """Estremi dei sotto-intervalli di [t0, t1] separati dai breakpoint interni."""
    inner = [float(b) for b in breakpoints if t0 < b < t1]
    return np.unique(np.concatenate([[t0], inner, [t1]]))


def integrate(
    func: Callable[[np.ndarray], np.ndarray],
    t0: float,
    t1: float,
    breakpoints: Iterable[float] = (),
    n_nodes: int = DEFAULT_NODES,
) -> float:
    """
    Integrale di ``func`` (vettoriale in s) su [t0, t1].

    ``func`` deve essere liscia dentro ogni sotto-intervallo; i salti dei
    parametri costanti a tratti vanno passati come ``breakpoints``.
    """
    if t1 <= t0:
        return 0.0
    nodes, weights = gauss_legendre(n_nodes)
    edges = split_interval(t0, t1, breakpoints)
    left, right = edges[:-1], edges[1:]
    half = 0.5 * (right - left)
    mid = 0.5 * (right + left)
    # Tutti i nodi in un'unica valutazione vettoriale
    points = (mid[:, None] + half[:, None] * nodes[None, :]).ravel()
    # I nodi di Gauss sono interni: i breakpoint non vengono mai valutati
    values = np.asarray(func(points), dtype=float).reshape(left.size, nodes.size)
    return float(np.sum(half * (values @ weights)))
