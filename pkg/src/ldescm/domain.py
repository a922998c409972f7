"""Typed model inputs: scenarios, technologies, demand curves, market design.

Units: power MW, energy MWh, prices $/MWh, annualised costs $/MW-yr or
$/MWh-yr, emissions tCO2.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace
from typing import Iterator, Mapping, NamedTuple

import numpy as np

HORIZON_HOURS = 8760.0


class RunMode(str, enum.Enum):
    EOM_VOLL = "EOM_VOLL"
    EOM_PC = "EOM_PC"
    E_PLUS_CM = "E_PLUS_CM"
    DISPATCH_FIXED_MIX = "DISPATCH_FIXED_MIX"


class DemandMode(str, enum.Enum):
    UNCAPPED = "UNCAPPED"
    CAPPED = "CAPPED"


class Interval(NamedTuple):
    duration: float
    fixed_demand: float
    flexible_demand: float
    availability: dict[str, float]


@dataclass(frozen=True, eq=False)
class Scenario:
    """One weather year: chronological intervals of (possibly) varying length."""

    name: str
    probability: float
    durations: np.ndarray
    fixed_demand: np.ndarray
    flexible_demand: np.ndarray
    availability: Mapping[str, np.ndarray] = field(default_factory=dict)

    def __post_init__(self):
        for attr in ("durations", "fixed_demand", "flexible_demand"):
            object.__setattr__(self, attr, np.asarray(getattr(self, attr), dtype=float))
        object.__setattr__(
            self,
            "availability",
            {k: np.asarray(v, dtype=float) for k, v in sorted(self.availability.items())},
        )

    @property
    def n_intervals(self) -> int:
        return self.durations.size

    @property
    def intervals(self) -> Iterator[Interval]:
        for t in range(self.n_intervals):
            yield Interval(
                float(self.durations[t]),
                float(self.fixed_demand[t]),
                float(self.flexible_demand[t]),
                {k: float(v[t]) for k, v in self.availability.items()},
            )

    def availability_of(self, key: str | None) -> np.ndarray:
        if key is None:
            return np.ones(self.n_intervals)
        return self.availability[key]

    def scaled_demand(self, k: float) -> "Scenario":
        return replace(self, fixed_demand=self.fixed_demand * k, flexible_demand=self.flexible_demand * k)

    def __eq__(self, other):
        if not isinstance(other, Scenario):
            return NotImplemented
        return (
            self.name == other.name
            and self.probability == other.probability
            and np.array_equal(self.durations, other.durations)
            and np.array_equal(self.fixed_demand, other.fixed_demand)
            and np.array_equal(self.flexible_demand, other.flexible_demand)
            and self.availability.keys() == other.availability.keys()
            and all(np.array_equal(v, other.availability[k]) for k, v in self.availability.items())
        )

    __hash__ = None


@dataclass(frozen=True)
class ScenarioSet:
    scenarios: tuple[Scenario, ...]
    horizon_hours: float = HORIZON_HOURS

    def __post_init__(self):
        object.__setattr__(self, "scenarios", tuple(self.scenarios))

    def __iter__(self):
        return iter(self.scenarios)

    def __len__(self):
        return len(self.scenarios)

    def expected_demand(self) -> float:
        """Expected annual demand Σ w·δ·(D_fix + D_flex) in MWh."""
        return float(sum(
            sc.probability * np.sum(sc.durations * (sc.fixed_demand + sc.flexible_demand))
            for sc in self.scenarios
        ))

    def peak_fixed_demand(self) -> float:
        return float(max(sc.fixed_demand.max() for sc in self.scenarios))

    def scaled_demand(self, k: float) -> "ScenarioSet":
        return replace(self, scenarios=tuple(sc.scaled_demand(k) for sc in self.scenarios))


@dataclass(frozen=True)
class CreditSegment:
    intercept: float
    slope: float
    lower: float
    upper: float

    def value(self, duration: float) -> float:
        return self.intercept + self.slope * duration


@dataclass(frozen=True)
class CreditCurve:
    """Concave, non-decreasing piecewise-linear credit as a function of duration.

    Because the curve is concave it equals the minimum over its segment lines,
    which is how both evaluation and the storage CM constraints use it. Values
    are clipped to [0, 1]; beyond the last breakpoint the last slope is
    extrapolated before clipping.
    """

    segments: tuple[CreditSegment, ...]

    def __post_init__(self):
        object.__setattr__(self, "segments", tuple(self.segments))
        if not self.segments:
            raise ValueError("a credit curve needs at least one segment")

    def __call__(self, duration: float) -> float:
        raw = min(seg.value(duration) for seg in self.segments)
        return float(min(1.0, max(0.0, raw)))

    def evaluate(self, durations) -> np.ndarray:
        z = np.atleast_1d(np.asarray(durations, dtype=float))
        raw = np.min([seg.intercept + seg.slope * z for seg in self.segments], axis=0)
        return np.clip(raw, 0.0, 1.0)

    @property
    def breakpoints(self) -> list[float]:
        return [self.segments[0].lower] + [seg.upper for seg in self.segments]

    def model_lines(self) -> list[tuple[float, float]]:
        """(intercept, slope) pairs for the linear CM qualification family.

        A flat line at 1 is appended when the curve would otherwise exceed one.
        """
        lines = [(seg.intercept, seg.slope) for seg in self.segments]
        last = self.segments[-1]
        exceeds = last.slope > 0 or any(seg.value(seg.lower) > 1.0 for seg in self.segments)
        if exceeds and (1.0, 0.0) not in lines:
            lines.append((1.0, 0.0))
        return lines

    def scaled(self, k: float) -> "CreditCurve":
        return CreditCurve(tuple(
            CreditSegment(seg.intercept * k, seg.slope * k, seg.lower, seg.upper)
            for seg in self.segments
        ))

    def violations(self, tol: float = 1e-9) -> list[str]:
        out = []
        segs = self.segments
        for a, b in zip(segs, segs[1:]):
            if abs(a.value(a.upper) - b.value(a.upper)) > tol:
                out.append(f"credit curve discontinuous at duration {a.upper}")
            if b.slope > a.slope + tol:
                out.append(f"credit curve not concave at duration {a.upper}")
            if abs(a.upper - b.lower) > tol:
                out.append(f"credit curve breakpoints do not chain at {a.upper}")
        if segs[0].intercept < -tol:
            out.append("credit curve negative at zero duration")
        for seg in segs:
            if seg.slope < -tol:
                out.append(f"credit curve decreasing on [{seg.lower}, {seg.upper}]")
        return out

    @classmethod
    def constant(cls, value: float = 1.0) -> "CreditCurve":
        return cls((CreditSegment(value, 0.0, 0.0, math.inf),))


@dataclass(frozen=True)
class GeneratorSpec:
    name: str
    variable_cost: float
    annualized_capex: float
    fixed_om: float
    emission_factor: float = 0.0
    availability_key: str | None = None
    capacity_credit: float = 1.0

    @property
    def annual_cost(self) -> float:
        """Annualised investment plus fixed O&M per MW-yr."""
        return self.annualized_capex + self.fixed_om


@dataclass(frozen=True)
class StorageSpec:
    name: str
    power_capex: float
    power_fixed_om: float
    energy_capex: float
    energy_fixed_om: float
    charge_efficiency: float
    discharge_efficiency: float
    variable_cost: float = 0.5
    credit_curve: CreditCurve | None = None

    @property
    def power_cost(self) -> float:
        return self.power_capex + self.power_fixed_om

    @property
    def energy_cost(self) -> float:
        return self.energy_capex + self.energy_fixed_om

    def duration(self, power: float, energy: float) -> float:
        """Discharge duration in hours: eta_dis * energy / power."""
        if power <= 0:
            return 0.0
        return self.discharge_efficiency * energy / power

    def energy_for(self, power: float, duration: float) -> float:
        return duration * power / self.discharge_efficiency


@dataclass(frozen=True)
class TechnologyCatalog:
    generators: tuple[GeneratorSpec, ...] = ()
    storages: tuple[StorageSpec, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "generators", tuple(self.generators))
        object.__setattr__(self, "storages", tuple(self.storages))

    @property
    def names(self) -> list[str]:
        return [g.name for g in self.generators] + [s.name for s in self.storages]

    def generator(self, name: str) -> GeneratorSpec:
        for g in self.generators:
            if g.name == name:
                return g
        raise KeyError(f"unknown generator {name!r}")

    def storage(self, name: str) -> StorageSpec:
        for s in self.storages:
            if s.name == name:
                return s
        raise KeyError(f"unknown storage {name!r}")

    def get(self, name: str) -> GeneratorSpec | StorageSpec:
        try:
            return self.generator(name)
        except KeyError:
            return self.storage(name)

    def with_credits(
        self,
        generator_credits: Mapping[str, float] | None = None,
        storage_curves: Mapping[str, CreditCurve] | None = None,
    ) -> "TechnologyCatalog":
        generator_credits = generator_credits or {}
        storage_curves = storage_curves or {}
        return TechnologyCatalog(
            tuple(replace(g, capacity_credit=generator_credits.get(g.name, g.capacity_credit))
                  for g in self.generators),
            tuple(replace(s, credit_curve=storage_curves.get(s.name, s.credit_curve))
                  for s in self.storages),
        )

    def add(self, *techs: GeneratorSpec | StorageSpec) -> "TechnologyCatalog":
        gens = list(self.generators)
        stos = list(self.storages)
        for tech in techs:
            if tech.name in self.names:
                raise ValueError(f"duplicate technology {tech.name!r}")
            (gens if isinstance(tech, GeneratorSpec) else stos).append(tech)
        return TechnologyCatalog(tuple(gens), tuple(stos))


@dataclass(frozen=True)
class CapacityDemandCurve:
    """Administrative WTP for accredited capacity.

    ``prices`` are the start prices B_1 > ... of the flexible pieces followed
    by the terminal price (always 0). The flat block pays ``prices[0]`` over
    ``fixed_width``; flexible piece ``n`` has width ``flexible_widths[n]`` and
    falls linearly from ``prices[n]`` to ``prices[n + 1]``.
    """

    fixed_width: float
    flexible_widths: tuple[float, ...]
    prices: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "flexible_widths", tuple(float(w) for w in self.flexible_widths))
        object.__setattr__(self, "prices", tuple(float(p) for p in self.prices))
        if len(self.prices) != len(self.flexible_widths) + 1:
            raise ValueError("need one more price than flexible segments")

    @property
    def ceiling(self) -> float:
        return self.prices[0]

    @property
    def total_width(self) -> float:
        return self.fixed_width + sum(self.flexible_widths)

    def breakpoints(self) -> list[tuple[float, float]]:
        pts = [(self.fixed_width, self.prices[0])]
        x = self.fixed_width
        for width, price in zip(self.flexible_widths, self.prices[1:]):
            x += width
            pts.append((x, price))
        return pts

    def price_at(self, quantity: float) -> float:
        if quantity <= self.fixed_width:
            return self.prices[0]
        x = self.fixed_width
        for n, width in enumerate(self.flexible_widths):
            if quantity <= x + width:
                frac = (quantity - x) / width if width > 0 else 1.0
                return self.prices[n] + frac * (self.prices[n + 1] - self.prices[n])
            x += width
        return 0.0

    def benefit(self, quantity: float) -> float:
        """Integral of the WTP from 0 to ``quantity``."""
        total = self.prices[0] * min(quantity, self.fixed_width)
        x = self.fixed_width
        for n, width in enumerate(self.flexible_widths):
            take = min(max(quantity - x, 0.0), width)
            if width > 0:
                total += self.prices[n] * take - (self.prices[n] - self.prices[n + 1]) * take**2 / (2 * width)
            x += width
        return total

    def violations(self) -> list[str]:
        out = []
        if any(b > a for a, b in zip(self.prices, self.prices[1:])):
            out.append("capacity demand prices must be non-increasing")
        if self.total_width <= 0:
            out.append("capacity demand curve has zero width")
        if self.prices[-1] != 0.0:
            out.append("capacity demand curve must end at price 0")
        if self.fixed_width < 0 or any(w < 0 for w in self.flexible_widths):
            out.append("capacity demand widths must be nonnegative")
        return out


@dataclass(frozen=True)
class FixedMix:
    """Installed capacities pinned for a dispatch-only run."""

    generators: Mapping[str, float] = field(default_factory=dict)
    storage_power: Mapping[str, float] = field(default_factory=dict)
    storage_energy: Mapping[str, float] = field(default_factory=dict)

    def __post_init__(self):
        for attr in ("generators", "storage_power", "storage_energy"):
            object.__setattr__(self, attr, {k: float(v) for k, v in getattr(self, attr).items()})

    def with_addition(self, name: str, power: float, energy: float | None = None) -> "FixedMix":
        if energy is None:
            gens = dict(self.generators)
            gens[name] = gens.get(name, 0.0) + power
            return FixedMix(gens, self.storage_power, self.storage_energy)
        sp_ = dict(self.storage_power)
        se = dict(self.storage_energy)
        sp_[name] = sp_.get(name, 0.0) + power
        se[name] = se.get(name, 0.0) + energy
        return FixedMix(self.generators, sp_, se)


@dataclass(frozen=True)
class MarketDesign:
    run_mode: RunMode
    voll: float = 20300.0
    price_cap: float = 7549.0
    emission_cap: float = math.inf
    capacity_demand_curve: CapacityDemandCurve | None = None
    fixed_capacities: FixedMix | None = None
    # only consulted for DISPATCH_FIXED_MIX; the other modes imply their demand shape
    price_capped: bool = True

    def __post_init__(self):
        object.__setattr__(self, "run_mode", RunMode(self.run_mode))

    @property
    def demand_mode(self) -> DemandMode:
        if self.run_mode is RunMode.EOM_VOLL:
            return DemandMode.UNCAPPED
        if self.run_mode is RunMode.DISPATCH_FIXED_MIX and not self.price_capped:
            return DemandMode.UNCAPPED
        return DemandMode.CAPPED

    @property
    def ceiling(self) -> float:
        return self.voll if self.demand_mode is DemandMode.UNCAPPED else self.price_cap

    @property
    def has_capacity_market(self) -> bool:
        return self.run_mode is RunMode.E_PLUS_CM

    @property
    def free_investment(self) -> bool:
        return self.run_mode is not RunMode.DISPATCH_FIXED_MIX


@dataclass(frozen=True)
class EnergyDemandCurve:
    """Effective per-interval energy demand blocks under a demand mode."""

    mode: DemandMode
    ceiling: float
    fixed_width: np.ndarray
    flexible_width: np.ndarray


def truncate_demand_for_price_cap(d_fix, d_flex, voll: float, price_cap: float):
    """Reshape demand blocks when prices are capped below VOLL.

    The flexible (linear) block keeps only the part with WTP below the cap,
    ``d_flex * pc / voll``; the rest joins the flat block. Works on scalars
    and arrays.
    """
    if voll <= 0:
        raise ValueError("VOLL must be positive")
    if not 0 < price_cap <= voll:
        raise ValueError(f"price cap {price_cap} must lie in (0, VOLL={voll}]")
    if price_cap == voll:
        return d_fix, d_flex
    shift = d_flex * (voll - price_cap) / voll
    return d_fix + shift, d_flex - shift


def energy_demand(scenario: Scenario, design: MarketDesign) -> EnergyDemandCurve:
    if design.demand_mode is DemandMode.UNCAPPED:
        return EnergyDemandCurve(DemandMode.UNCAPPED, design.voll,
                                 scenario.fixed_demand.copy(), scenario.flexible_demand.copy())
    fixed, flex = truncate_demand_for_price_cap(
        scenario.fixed_demand, scenario.flexible_demand, design.voll, design.price_cap)
    return EnergyDemandCurve(DemandMode.CAPPED, design.price_cap, np.asarray(fixed), np.asarray(flex))


def capital_recovery_factor(rate: float, years: float) -> float:
    """Annuity factor r(1+r)^n / ((1+r)^n - 1) turning overnight cost into $/yr."""
    if rate == 0:
        return 1.0 / years
    growth = (1.0 + rate) ** years
    return rate * growth / (growth - 1.0)


@dataclass
class ValidationReport:
    problems: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.problems

    def __bool__(self) -> bool:
        return self.ok


def validate_inputs(
    scenarios: ScenarioSet,
    catalog: TechnologyCatalog,
    design: MarketDesign | None = None,
) -> ValidationReport:
    """Check every input invariant; never raises for bad data."""
    problems: list[str] = []
    add = problems.append
    total = sum(sc.probability for sc in scenarios)
    if abs(total - 1.0) > 1e-9:
        add(f"probability weights sum to {total:.12g}")
    names = [sc.name for sc in scenarios]
    if len(set(names)) != len(names):
        add("scenario names must be unique")
    for sc in scenarios:
        where = f"scenario {sc.name!r}"
        if sc.probability < 0:
            add(f"{where}: negative probability weight")
        n = sc.n_intervals
        if n == 0:
            add(f"{where}: no intervals")
            continue
        for attr in ("fixed_demand", "flexible_demand"):
            if getattr(sc, attr).shape != (n,):
                add(f"{where}: {attr} length mismatch")
        bad = np.flatnonzero(~(sc.durations > 0))
        if bad.size:
            add(f"{where}: interval {int(bad[0])} has nonpositive duration")
        horizon = float(np.sum(sc.durations))
        if abs(horizon - scenarios.horizon_hours) > 1e-6 * scenarios.horizon_hours:
            add(f"{where}: durations sum to {horizon:.6g} h, expected {scenarios.horizon_hours:.6g}")
        for attr in ("fixed_demand", "flexible_demand"):
            bad = np.flatnonzero(~(getattr(sc, attr) >= 0))
            if bad.size:
                add(f"{where}: interval {int(bad[0])} has negative or missing {attr}")
        for key, series in sc.availability.items():
            if series.shape != (n,):
                add(f"{where}: availability {key!r} length mismatch")
                continue
            bad = np.flatnonzero(~((series >= 0) & (series <= 1)))
            if bad.size:
                add(f"{where}: interval {int(bad[0])} availability {key!r} outside [0, 1]")

    names = catalog.names
    if len(set(names)) != len(names):
        add("technology names must be unique")
    for g in catalog.generators:
        where = f"generator {g.name!r}"
        for attr in ("variable_cost", "annualized_capex", "fixed_om"):
            if not getattr(g, attr) >= 0:
                add(f"{where}: {attr} must be nonnegative")
        if not g.emission_factor >= 0:
            add(f"{where}: emission factor must be nonnegative")
        if not 0 <= g.capacity_credit <= 1:
            add(f"{where}: capacity credit must lie in [0, 1]")
        if g.availability_key is not None:
            for sc in scenarios:
                if g.availability_key not in sc.availability:
                    add(f"{where}: availability profile {g.availability_key!r} missing in scenario {sc.name!r}")
    for s in catalog.storages:
        where = f"storage {s.name!r}"
        if not s.charge_efficiency > 0:
            add(f"{where}: charge efficiency must be positive")
        elif s.charge_efficiency > 1:
            add(f"{where}: charge efficiency must not exceed 1")
        if not s.discharge_efficiency > 0:
            add(f"{where}: discharge efficiency must be positive")
        elif s.discharge_efficiency > 1:
            add(f"{where}: discharge efficiency must not exceed 1")
        for attr in ("power_capex", "power_fixed_om", "energy_capex", "energy_fixed_om", "variable_cost"):
            if not getattr(s, attr) >= 0:
                add(f"{where}: {attr} must be nonnegative")
        if s.credit_curve is not None:
            problems.extend(f"{where}: {msg}" for msg in s.credit_curve.violations())

    if design is not None:
        if not design.voll > 0:
            add("VOLL must be positive")
        if not 0 < design.price_cap <= design.voll:
            add("price cap must lie in (0, VOLL]")
        if not design.emission_cap >= 0:
            add("emission cap must be nonnegative")
        if design.has_capacity_market:
            if design.capacity_demand_curve is None:
                add("E_PLUS_CM requires a capacity demand curve")
            else:
                problems.extend(design.capacity_demand_curve.violations())
            for s in catalog.storages:
                if s.credit_curve is None:
                    add(f"storage {s.name!r}: E_PLUS_CM requires a credit curve")
        if design.run_mode is RunMode.DISPATCH_FIXED_MIX:
            mix = design.fixed_capacities
            if mix is None:
                add("DISPATCH_FIXED_MIX requires fixed capacities")
            else:
                for name in list(mix.generators) + list(mix.storage_power) + list(mix.storage_energy):
                    if name not in names:
                        add(f"fixed capacity for unknown technology {name!r}")
                for label, values in (("generator", mix.generators), ("storage power", mix.storage_power),
                                      ("storage energy", mix.storage_energy)):
                    for name, val in values.items():
                        if not val >= 0:
                            add(f"fixed {label} capacity of {name!r} must be nonnegative")
    return ValidationReport(problems)


# Default technology table: overnight costs in $/kW and $/kWh, lifetimes, WACC.
DEFAULT_TECHNOLOGY_TABLE = {
    "ccgt_ccs": dict(kind="generator", power_capex_per_kw=2500.0, fom_per_kw_yr=27.0,
                     variable_cost=40.0, lifetime=30, wacc=0.071, emission_factor=0.0378,
                     availability_key=None),
    "solar": dict(kind="generator", power_capex_per_kw=895.0, fom_per_kw_yr=15.0,
                  variable_cost=0.5, lifetime=30, wacc=0.062, emission_factor=0.0,
                  availability_key="solar"),
    "wind": dict(kind="generator", power_capex_per_kw=1335.0, fom_per_kw_yr=28.0,
                 variable_cost=0.5, lifetime=30, wacc=0.062, emission_factor=0.0,
                 availability_key="wind"),
    "battery": dict(kind="storage", power_capex_per_kw=306.0, energy_capex_per_kwh=223.0,
                    fom_per_kw_yr=7.6, energy_fom_per_kwh_yr=5.6, variable_cost=0.5,
                    charge_efficiency=0.92, discharge_efficiency=0.92, lifetime=15, wacc=0.071),
    "ldes": dict(kind="storage", power_capex_per_kw=2000.0, energy_capex_per_kwh=10.0,
                 fom_per_kw_yr=40.0, energy_fom_per_kwh_yr=0.1, variable_cost=0.5,
                 charge_efficiency=0.60, discharge_efficiency=0.50, lifetime=30, wacc=0.071),
}


def technology_from_table(name: str, row: Mapping) -> GeneratorSpec | StorageSpec:
    """Annualise one technology-table record (per-kW inputs) into a per-MW spec."""
    crf = capital_recovery_factor(row["wacc"], row["lifetime"])
    if row["kind"] == "generator":
        return GeneratorSpec(
            name=name,
            variable_cost=row["variable_cost"],
            annualized_capex=1000.0 * row["power_capex_per_kw"] * crf,
            fixed_om=1000.0 * row["fom_per_kw_yr"],
            emission_factor=row.get("emission_factor", 0.0),
            availability_key=row.get("availability_key"),
        )
    return StorageSpec(
        name=name,
        power_capex=1000.0 * row["power_capex_per_kw"] * crf,
        power_fixed_om=1000.0 * row["fom_per_kw_yr"],
        energy_capex=1000.0 * row["energy_capex_per_kwh"] * crf,
        energy_fixed_om=1000.0 * row["energy_fom_per_kwh_yr"],
        charge_efficiency=row["charge_efficiency"],
        discharge_efficiency=row["discharge_efficiency"],
        variable_cost=row.get("variable_cost", 0.5),
    )


def default_catalog(table: Mapping[str, Mapping] | None = None) -> TechnologyCatalog:
    table = DEFAULT_TECHNOLOGY_TABLE if table is None else table
    return TechnologyCatalog().add(*(technology_from_table(k, v) for k, v in table.items()))


REFERENCE_GENERATOR = "reference"


def reference_generator(name: str = REFERENCE_GENERATOR) -> GeneratorSpec:
    """Perfectly available, zero-cost, emission-free generator used for accreditation."""
    return GeneratorSpec(name=name, variable_cost=0.0, annualized_capex=0.0, fixed_om=0.0,
                         emission_factor=0.0, availability_key=None, capacity_credit=1.0)
