"""Set-valued average value at risk for multi-asset positions.

The regulator set collects the eligible deposits that make a position
acceptable asset by asset; the market extension also allows trading at
time 0 and at the horizon under proportional transaction costs.
"""
from __future__ import annotations

from .core import AlphaVector, EligibleSpace, GeneratedCone, Payoff, RiskSet, ScenarioModel, ValidationError
from .riskbuild import MarketInstance, avar_market, avar_regulator, is_acceptable

__version__ = "0.1.0"

__all__ = [
    "AlphaVector",
    "EligibleSpace",
    "GeneratedCone",
    "MarketInstance",
    "Payoff",
    "RiskSet",
    "ScenarioModel",
    "ValidationError",
    "avar_market",
    "avar_regulator",
    "is_acceptable",
]
