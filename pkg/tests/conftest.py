"""Shared fixtures: the desk-scale scarcity case and small hand-built systems."""

from __future__ import annotations

import numpy as np
import pytest

from ldescm.analysis import SuiteSettings, run_suite
from ldescm.domain import (
    GeneratorSpec,
    Scenario,
    ScenarioSet,
    StorageSpec,
    TechnologyCatalog,
    default_catalog,
)
from ldescm.synthetic import generate_synthetic_scenarios

# desk case: two synthetic weather years of 336 intervals, 10 g/kWh emission intensity
DESK_SEED = 0
DESK_INTENSITY_G_PER_KWH = 10.0


def desk_settings(scenarios: ScenarioSet, **kwargs) -> SuiteSettings:
    cap = DESK_INTENSITY_G_PER_KWH * 1e-3 * scenarios.expected_demand()
    return SuiteSettings(emission_cap=cap, **kwargs)


@pytest.fixture(scope="session")
def desk_scenarios() -> ScenarioSet:
    return generate_synthetic_scenarios(DESK_SEED, 2, 336)


@pytest.fixture(scope="session")
def catalog() -> TechnologyCatalog:
    return default_catalog()


@pytest.fixture(scope="session")
def desk_suite(desk_scenarios, catalog):
    return run_suite(desk_scenarios, catalog, desk_settings(desk_scenarios))


def single_scenario(fixed, flexible=0.0, durations=None, availability=None, name="s") -> ScenarioSet:
    fixed = np.atleast_1d(np.asarray(fixed, dtype=float))
    durations = np.ones_like(fixed) if durations is None else np.asarray(durations, dtype=float)
    flexible = np.broadcast_to(np.asarray(flexible, dtype=float), fixed.shape).copy()
    sc = Scenario(name, 1.0, durations, fixed, flexible, availability or {})
    return ScenarioSet((sc,), float(durations.sum()))


def simple_generator(name="gen", variable_cost=10.0, annual_cost=100.0, **kwargs) -> GeneratorSpec:
    return GeneratorSpec(name, variable_cost, annual_cost, 0.0, **kwargs)


def simple_storage(name="store", power_cost=5.0, energy_cost=1.0, eta_ch=1.0, eta_dis=1.0,
                   variable_cost=0.0, **kwargs) -> StorageSpec:
    return StorageSpec(name, power_cost, 0.0, energy_cost, 0.0, eta_ch, eta_dis, variable_cost, **kwargs)


def toy_case() -> tuple[ScenarioSet, TechnologyCatalog]:
    """Two equally likely 8-hour days with wind, a gas unit and one storage."""
    demand = np.array([[50, 60, 80, 100, 90, 70, 55, 45], [45, 55, 75, 95, 100, 80, 60, 50]], dtype=float)
    wind = np.array([[0.9, 0.8, 0.2, 0.1, 0.3, 0.9, 1.0, 0.6], [0.7, 0.9, 0.5, 0.2, 0.0, 0.4, 0.8, 1.0]])
    scs = tuple(Scenario(f"d{k}", 0.5, np.ones(8), demand[k], np.full(8, 2.0), {"wind": wind[k]})
                for k in range(2))
    catalog = TechnologyCatalog(
        (simple_generator("wind", 0.5, 60.0, availability_key="wind"),
         simple_generator("gas", 30.0, 100.0, emission_factor=0.4)),
        (StorageSpec("store", 40.0, 0.0, 20.0, 0.0, 0.9, 0.9, 0.5),),
    )
    return ScenarioSet(scs, 8.0), catalog
