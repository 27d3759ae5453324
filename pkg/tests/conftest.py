import sys
from pathlib import Path

import numpy as np
import pytest

ROOT = Path(__file__).resolve().parents[1]
if str(ROOT) not in sys.path:
    sys.path.insert(0, str(ROOT))

from app.models import (  # noqa: E402
    CpiTenor,
    CpiVolSurface,
    FactorParams,
    G1ppParams,
    PiecewiseConstant,
    RateCorrelations,
)
from app.parsers.market_data_parser import load_discount_curve, load_g1pp, load_vol_surface  # noqa: E402

EXAMPLE_DIR = ROOT / "data" / "example"

P2 = FactorParams.from_vector(2, [-3.689, 3.553, 0.042])
P3 = FactorParams.from_vector(3, [2.319, -2.068, 0.275, -0.145, 0.085, 0.142])


def flat_surface(resets, vol=0.02, forwards=None, kbars=(-0.02, 0.0, 0.02, 0.05)):
    """Superficie con smile piatta su tutti i tenor (T~_i = T_i)."""
    forwards = forwards if forwards is not None else [100.0 * 1.02**T for T in resets]
    tenors = tuple(
        CpiTenor(reset=T, payment=T, forward=F, kbar=np.array(kbars), vols=np.full(len(kbars), vol))
        for T, F in zip(resets, forwards)
    )
    return CpiVolSurface(tenors)


def deterministic_rates(a=0.02):
    return G1ppParams(PiecewiseConstant.constant(a), PiecewiseConstant.constant(0.0))


@pytest.fixture
def example_dir():
    return EXAMPLE_DIR


@pytest.fixture
def curve():
    return load_discount_curve(EXAMPLE_DIR / "discounts.csv")


@pytest.fixture
def surface():
    return load_vol_surface(EXAMPLE_DIR / "cpi_vols.csv")


@pytest.fixture
def g1pp():
    return load_g1pp(EXAMPLE_DIR / "g1pp.csv", 0.02)


@pytest.fixture
def rates_m2():
    return RateCorrelations.uniform(-0.5, 2)
