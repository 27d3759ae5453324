"""
Genera un `history.csv` sintetico dai parametri di fattore indicati.

Le serie storiche reali dietro il confronto delle correlazioni non sono
pubbliche: questa serie serve per i test e per la configurazione di esempio.

Esempio:
    python scripts/make_synthetic_history.py --out data/example/history.csv --factors 2 \
        --params -3.689 3.553 0.042
"""

import argparse
import sys
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parents[1]))

from app.models import FactorParams  # noqa: E402
from app.parsers.market_data_parser import load_vol_surface  # noqa: E402
from app.repositories.market_data_repo import write_history  # noqa: E402
from app.services.correlation_service import DEFAULT_FIT_SEED, synthetic_history  # noqa: E402


def main() -> None:
    parser = argparse.ArgumentParser(description="Serie storica sintetica da un modello a M fattori.")
    parser.add_argument("--out", required=True, help="CSV di destinazione.")
    parser.add_argument("--vols", default="data/example/cpi_vols.csv", help="Superficie da cui leggere tenor e forward.")
    parser.add_argument("--factors", type=int, choices=(2, 3), default=2)
    parser.add_argument("--params", type=float, nargs="+", required=True, help="h poi kappa.")
    parser.add_argument("--days", type=int, default=500)
    parser.add_argument("--seed", type=int, default=DEFAULT_FIT_SEED)
    args = parser.parse_args()

    surface = load_vol_surface(args.vols)
    params = FactorParams.from_vector(args.factors, args.params)
    history = synthetic_history(
        params, surface.resets, np.log(surface.forwards), n_days=args.days, seed=args.seed
    )
    path = write_history(history, args.out)
    print(f"Serie scritta in {path} ({history.n_rows} giorni, {history.tenors.size} bucket)")


if __name__ == "__main__":
    main()
