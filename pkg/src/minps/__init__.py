"""Minimums Probabilistic Serial random assignment in exact arithmetic."""

from minps.decompose import Lottery, decompose, sample
from minps.eating import EatingTrace, StepRecord, mps, mps_general, mps_unit
from minps.estimator import MinimumsProbabilisticSerial
from minps.market import (
    FosdResult,
    Market,
    MarketError,
    ObjectSpec,
    fosd_compare,
    load_market,
    make_market,
    parse_market,
    validate_feasibility,
)

__all__ = [
    "EatingTrace", "FosdResult", "Lottery", "Market", "MarketError", "MinimumsProbabilisticSerial",
    "ObjectSpec", "StepRecord", "decompose", "fosd_compare", "load_market", "make_market", "mps",
    "mps_general", "mps_unit", "parse_market", "sample", "validate_feasibility",
]
