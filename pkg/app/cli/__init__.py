"""
Sotto-comandi della riga di comando.

Ogni modulo `commands_*.py` espone una funzione `register(subparsers)` che
aggiunge i propri comandi; `register_commands` li registra tutti.
"""

import argparse


def register_commands(subparsers: argparse._SubParsersAction) -> None:
    from .commands_calibration import register as register_calibration
    from .commands_pricing import register as register_pricing

    register_calibration(subparsers)
    register_pricing(subparsers)
