"""
Package repositories.
Espone le funzioni di scrittura su file (CSV canonici e report JSON).
"""

from .market_data_repo import serialize_market
from .output_repo import save_leverage_surface, write_factors, write_json, write_table

__all__ = [
    "serialize_market",
    "save_leverage_surface",
    "write_factors",
    "write_json",
    "write_table",
]
