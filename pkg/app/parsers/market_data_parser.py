"""
Parser per i file di mercato in formato CSV.

Questo modulo fornisce:
- `load_market(...)`: curva di sconto, superficie di volatilità CPI e serie storica
- `load_g1pp(path, a)`: volatilità G1++ costante a tratti

Ogni violazione di schema o di invariante viene riportata con il contesto
`file:riga` (la riga 1 è l'header).
"""

from __future__ import annotations

import logging
from pathlib import Path
from typing import List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from app.models import (
    DEFAULT_SMILE_METHOD,
    CpiTenor,
    CpiVolSurface,
    DiscountCurve,
    G1ppParams,
    HistoricalSeries,
    MarketDataError,
    PiecewiseConstant,
)
from app.models.errors import G1ppError

logger = logging.getLogger(__name__)

DISCOUNT_COLUMNS = ["T", "df"]
VOL_COLUMNS = ["Ti", "Ti_tilde", "F0", "Kbar", "sigma"]
HISTORY_COLUMNS = ["date", "bucket", "logF"]
G1PP_COLUMNS = ["t", "sigma_r"]

# Buchi nella serie storica riempiti in avanti per al massimo 3 giorni lavorativi
HISTORY_FFILL_LIMIT = 3


class MarketDataParseError(MarketDataError):
    """Errore di schema o di validazione in un file di mercato (con file:riga)."""

    def __init__(self, path: Path | str, message: str, line: Optional[int] = None):
        self.path = Path(path)
        self.line = line
        location = f"{self.path.name}:{line}" if line is not None else self.path.name
        super().__init__(f"{location}: {message}")


# =========================
#  Utility comuni
# =========================


def _file_line(row_index: int) -> int:
    # Riga 1 = header, la prima riga dati è la 2
    return int(row_index) + 2


def _read_csv(path: Path | str, columns: Sequence[str]) -> pd.DataFrame:
    file_path = Path(path)
    if not file_path.is_file():
        raise FileNotFoundError(f"File non trovato: {file_path}")
    try:
        frame = pd.read_csv(file_path, dtype=str, keep_default_na=False, encoding="utf-8")
    except (pd.errors.ParserError, UnicodeDecodeError) as exc:
        raise MarketDataParseError(file_path, f"CSV non leggibile ({exc})") from exc
    if list(frame.columns) != list(columns):
        raise MarketDataParseError(
            file_path, f"Header atteso {','.join(columns)}, trovato {','.join(frame.columns)}", 1
        )
    return frame


def _numeric_column(frame: pd.DataFrame, column: str, path: Path | str, *, allow_empty: bool = False) -> np.ndarray:
    raw = frame[column].str.strip()
    values = pd.to_numeric(raw.where(raw != "", None), errors="coerce")
    bad = values.isna() & (raw != "" if allow_empty else True)
    if bad.any():
        row = int(np.flatnonzero(bad.to_numpy())[0])
        raise MarketDataParseError(
            path, f"Valore non numerico nella colonna '{column}': {frame[column].iloc[row]!r}", _file_line(row)
        )
    return values.to_numpy(dtype=float)


# =========================
#  Curva di sconto
# =========================


def load_discount_curve(path: Path | str) -> DiscountCurve:
    """Legge `discounts.csv` (header `T,df`)."""
    frame = _read_csv(path, DISCOUNT_COLUMNS)
    times = _numeric_column(frame, "T", path)
    dfs = _numeric_column(frame, "df", path)
    if times.size < 2:
        raise MarketDataParseError(path, "La curva richiede almeno due pilastri")
    if times[0] != 0.0 or dfs[0] != 1.0:
        raise MarketDataParseError(path, "Il primo pilastro deve essere (0, 1)", _file_line(0))
    for row in range(1, times.size):
        if times[row] <= times[row - 1]:
            kind = "duplicato" if times[row] == times[row - 1] else "non crescente"
            raise MarketDataParseError(path, f"Pilastro T={times[row]:g} {kind}", _file_line(row))
    for row, value in enumerate(dfs):
        if not 0.0 < value <= 1.0:
            raise MarketDataParseError(path, f"Fattore di sconto fuori da (0, 1]: {value:g}", _file_line(row))
    return DiscountCurve(times=times, discount_factors=dfs)


# =========================
#  Superficie di volatilità CPI
# =========================


def load_vol_surface(
    path: Path | str,
    *,
    interpolation: str = DEFAULT_SMILE_METHOD,
    reference_index: Optional[float] = None,
) -> CpiVolSurface:
    """
    Legge `cpi_vols.csv` (una riga per tenor/strike). Una riga con Kbar e sigma
    vuoti dichiara un tenor senza quote, che viene rifiutato come smile vuota.
    """
    frame = _read_csv(path, VOL_COLUMNS)
    resets = _numeric_column(frame, "Ti", path)
    payments = _numeric_column(frame, "Ti_tilde", path)
    forwards = _numeric_column(frame, "F0", path)
    kbars = _numeric_column(frame, "Kbar", path, allow_empty=True)
    sigmas = _numeric_column(frame, "sigma", path, allow_empty=True)

    groups: List[Tuple[int, List[int]]] = []
    for row in range(resets.size):
        if groups and resets[row] == resets[groups[-1][0]]:
            first = groups[-1][0]
            if payments[row] != payments[first] or forwards[row] != forwards[first]:
                raise MarketDataParseError(
                    path, f"Ti_tilde/F0 incoerenti per il tenor T={resets[row]:g}", _file_line(row)
                )
            groups[-1][1].append(row)
            continue
        if groups and resets[row] <= resets[groups[-1][0]]:
            raise MarketDataParseError(path, f"Tenor T={resets[row]:g} non crescente", _file_line(row))
        groups.append((row, [row]))

    tenors: List[CpiTenor] = []
    for first, rows in groups:
        quoted = [row for row in rows if not (np.isnan(kbars[row]) and np.isnan(sigmas[row]))]
        if not quoted:
            raise MarketDataParseError(path, f"Smile vuota per il tenor T={resets[first]:g}", _file_line(first))
        for row in quoted:
            if np.isnan(kbars[row]) or np.isnan(sigmas[row]):
                raise MarketDataParseError(path, "Quota incompleta (Kbar o sigma mancante)", _file_line(row))
            if sigmas[row] <= 0.0:
                raise MarketDataParseError(path, f"Volatilità non positiva: {sigmas[row]:g}", _file_line(row))
        for previous, row in zip(quoted, quoted[1:]):
            if kbars[row] <= kbars[previous]:
                raise MarketDataParseError(path, "Strike non strettamente crescenti", _file_line(row))
        try:
            tenors.append(
                CpiTenor(
                    reset=resets[first],
                    payment=payments[first],
                    forward=forwards[first],
                    kbar=kbars[quoted],
                    vols=sigmas[quoted],
                )
            )
        except MarketDataError as exc:
            raise MarketDataParseError(path, str(exc), _file_line(first)) from exc

    return CpiVolSurface(tuple(tenors), reference_index=reference_index, interpolation=interpolation)


# =========================
#  Serie storica
# =========================


def load_history(path: Path | str) -> HistoricalSeries:
    """
    Legge `history.csv` (formato lungo `date,bucket,logF`), pivota per data e
    bucket, riempie in avanti i buchi fino a 3 giorni e scarta le righe ancora
    incomplete.
    """
    frame = _read_csv(path, HISTORY_COLUMNS)
    dates = pd.to_datetime(frame["date"].str.strip(), format="%Y-%m-%d", errors="coerce")
    if dates.isna().any():
        row = int(np.flatnonzero(dates.isna().to_numpy())[0])
        raise MarketDataParseError(path, f"Data non valida: {frame['date'].iloc[row]!r}", _file_line(row))
    long = pd.DataFrame(
        {
            "date": dates,
            "bucket": _numeric_column(frame, "bucket", path),
            "logF": _numeric_column(frame, "logF", path),
        }
    )
    duplicated = long.duplicated(subset=["date", "bucket"])
    if duplicated.any():
        row = int(np.flatnonzero(duplicated.to_numpy())[0])
        raise MarketDataParseError(path, "Coppia data/bucket duplicata", _file_line(row))

    wide = long.pivot(index="date", columns="bucket", values="logF").sort_index()
    filled = wide.ffill(limit=HISTORY_FFILL_LIMIT)
    cleaned = filled.dropna(how="any")
    dropped = len(wide) - len(cleaned)
    if dropped:
        logger.info(
            "Righe storiche scartate dopo il forward-fill",
            extra={"file": Path(path).name, "dropped_rows": dropped, "kept_rows": len(cleaned)},
        )

    return HistoricalSeries(
        dates=cleaned.index.to_numpy(dtype="datetime64[D]"),
        tenors=cleaned.columns.to_numpy(dtype=float),
        log_levels=cleaned.to_numpy(dtype=float),
    )


# =========================
#  Parametri G1++
# =========================


def load_g1pp(path: Path | str, a: float) -> G1ppParams:
    """Legge `g1pp.csv` (header `t,sigma_r`); ``sigma_r`` vale su (t_{k-1}, t_k]."""
    frame = _read_csv(path, G1PP_COLUMNS)
    times = _numeric_column(frame, "t", path)
    vols = _numeric_column(frame, "sigma_r", path)
    if times.size == 0:
        raise MarketDataParseError(path, "Nessun nodo di volatilità G1++")
    for row in range(times.size):
        if times[row] <= (times[row - 1] if row else 0.0):
            raise MarketDataParseError(path, f"Nodo t={times[row]:g} non crescente", _file_line(row))
        if vols[row] < 0.0:
            raise MarketDataParseError(path, f"Volatilità G1++ negativa: {vols[row]:g}", _file_line(row))
    try:
        return G1ppParams(PiecewiseConstant.constant(a), PiecewiseConstant(times, vols))
    except G1ppError as exc:
        raise MarketDataParseError(path, str(exc)) from exc


def load_market(
    discounts_path: Path | str,
    vols_path: Path | str,
    history_path: Optional[Path | str] = None,
    *,
    interpolation: str = DEFAULT_SMILE_METHOD,
    reference_index: Optional[float] = None,
) -> Tuple[DiscountCurve, CpiVolSurface, Optional[HistoricalSeries]]:
    """Carica e valida tutti gli input di mercato; la serie storica è opzionale."""
    curve = load_discount_curve(discounts_path)
    surface = load_vol_surface(vols_path, interpolation=interpolation, reference_index=reference_index)
    history = load_history(history_path) if history_path is not None else None
    logger.info(
        "Dati di mercato caricati",
        extra={
            "pillars": int(curve.times.size),
            "tenors": len(surface),
            "history_rows": history.n_rows if history is not None else 0,
        },
    )
    return curve, surface, history
