"""Two-stage stochastic equilibrium model of an electricity market with
long-duration storage, a capacity market and marginal EUE accreditation."""

from .domain import (
    CapacityDemandCurve,
    CreditCurve,
    CreditSegment,
    FixedMix,
    GeneratorSpec,
    MarketDesign,
    RunMode,
    Scenario,
    ScenarioSet,
    StorageSpec,
    TechnologyCatalog,
    default_catalog,
    validate_inputs,
)
from .synthetic import generate_synthetic_scenarios

__all__ = [
    "CapacityDemandCurve",
    "CreditCurve",
    "CreditSegment",
    "FixedMix",
    "GeneratorSpec",
    "MarketDesign",
    "RunMode",
    "Scenario",
    "ScenarioSet",
    "StorageSpec",
    "TechnologyCatalog",
    "default_catalog",
    "generate_synthetic_scenarios",
    "validate_inputs",
]
__version__ = "0.1.0"
