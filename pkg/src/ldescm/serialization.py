"""Reading and writing model inputs.

Scenarios travel as a comma-separated table with one row per (scenario,
interval)::

    scenario_id,interval_id,weight_hours,d_fix_mw,d_flex_mw,<profile>...

Every other domain type converts to and from plain dictionaries (and so to
YAML). Technologies may be given either annualised (``annualized_capex``,
``fixed_om`` ...) or in the overnight-cost form of the default table
(``power_capex_per_kw``, ``lifetime``, ``wacc`` ...).
"""

from __future__ import annotations

import csv
import math
from pathlib import Path
from typing import Any, Mapping

import numpy as np
import yaml

from .domain import (
    HORIZON_HOURS,
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
    technology_from_table,
)

SCENARIO_COLUMNS = ("scenario_id", "interval_id", "weight_hours", "d_fix_mw", "d_flex_mw")


class InputFormatError(ValueError):
    """An input file cannot be turned into domain objects.

    ``diagnostics`` lists every problem found, each naming the offending
    row or field.
    """

    def __init__(self, message: str, diagnostics: list[str] | None = None):
        self.diagnostics = list(diagnostics or [])
        detail = "; ".join(self.diagnostics[:5])
        more = f" (+{len(self.diagnostics) - 5} more)" if len(self.diagnostics) > 5 else ""
        super().__init__(f"{message}: {detail}{more}" if detail else message)


# ---------------------------------------------------------------------------
# scenarios


def _number(text: str) -> float:
    # float() accepts only a dot decimal separator regardless of locale
    value = float(text.strip())
    if not math.isfinite(value):
        raise ValueError(f"non-finite value {text!r}")
    return value


def read_scenarios(path: str | Path, weights: Mapping[str, float] | None = None,
                   horizon_hours: float = HORIZON_HOURS) -> ScenarioSet:
    """Parse a scenario table.

    Scenarios keep their order of first appearance; intervals are ordered by
    ``interval_id``, which must run 0..n-1 within each scenario. Without
    ``weights`` the scenarios are equally likely. Row-level problems are
    collected and raised together.
    """
    path = Path(path)
    problems: list[str] = []
    rows: dict[str, list[tuple[int, float, float, float, list[float]]]] = {}
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise InputFormatError(f"{path}: empty file") from None
        if tuple(header[:5]) != SCENARIO_COLUMNS:
            raise InputFormatError(f"{path}: bad header",
                                   [f"expected leading columns {', '.join(SCENARIO_COLUMNS)}, got {', '.join(header[:5])}"])
        profiles = header[5:]
        if len(set(profiles)) != len(profiles) or any(not p for p in profiles):
            raise InputFormatError(f"{path}: bad header", ["availability column names must be unique and non-empty"])
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            where = f"row {lineno}"
            if len(row) != len(header):
                problems.append(f"{where}: expected {len(header)} fields, found {len(row)}")
                continue
            sid = row[0].strip()
            if not sid:
                problems.append(f"{where}: empty scenario_id")
                continue
            try:
                tid = int(row[1].strip())
            except ValueError:
                problems.append(f"{where}: interval_id {row[1]!r} is not an integer")
                continue
            values = []
            bad = False
            for col, text in zip(header[2:], row[2:]):
                try:
                    values.append(_number(text))
                except ValueError:
                    problems.append(f"{where}: {col} {text!r} is not a number")
                    bad = True
            if bad:
                continue
            w, dfix, dflex, *avail = values
            if w <= 0:
                problems.append(f"{where}: weight_hours must be positive, got {w}")
            if dfix < 0:
                problems.append(f"{where}: d_fix_mw must be nonnegative, got {dfix}")
            if dflex < 0:
                problems.append(f"{where}: d_flex_mw must be nonnegative, got {dflex}")
            for col, a in zip(profiles, avail):
                if not 0.0 <= a <= 1.0:
                    problems.append(f"{where}: availability {col} must lie in [0, 1], got {a}")
            rows.setdefault(sid, []).append((tid, w, dfix, dflex, avail))

    if not rows and not problems:
        problems.append("no data rows")
    for sid, items in rows.items():
        ids = sorted(t for t, *_ in items)
        if ids != list(range(len(ids))):
            problems.append(f"scenario {sid!r}: interval_id values must be 0..{len(ids) - 1} without gaps or repeats")
    if weights is not None:
        missing = sorted(set(rows) - set(weights))
        if missing:
            problems.append(f"no probability weight for scenario(s) {', '.join(missing)}")
        extra = sorted(set(weights) - set(rows))
        if extra:
            problems.append(f"probability weight for unknown scenario(s) {', '.join(extra)}")
    if problems:
        raise InputFormatError(f"{path}: invalid scenario table", problems)

    scenarios = []
    for sid, items in rows.items():
        items.sort(key=lambda r: r[0])
        arr = np.array([[w, dfix, dflex, *avail] for _, w, dfix, dflex, avail in items], dtype=float)
        prob = float(weights[sid]) if weights is not None else 1.0 / len(rows)
        scenarios.append(Scenario(sid, prob, arr[:, 0], arr[:, 1], arr[:, 2],
                                  {p: arr[:, 3 + j] for j, p in enumerate(profiles)}))
    return ScenarioSet(tuple(scenarios), horizon_hours)


def write_scenarios(scenarios: ScenarioSet, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    profiles = sorted({k for sc in scenarios for k in sc.availability})
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([*SCENARIO_COLUMNS, *profiles])
        for sc in scenarios:
            for t in range(sc.n_intervals):
                w.writerow([sc.name, t, repr(float(sc.durations[t])), repr(float(sc.fixed_demand[t])),
                            repr(float(sc.flexible_demand[t])),
                            *(repr(float(sc.availability[p][t])) if p in sc.availability else "1.0"
                              for p in profiles)])
    return path


# ---------------------------------------------------------------------------
# dictionaries


def _num(v: float) -> float:
    return float(v)


def credit_curve_to_dict(curve: CreditCurve) -> list[dict]:
    return [{"intercept": _num(s.intercept), "slope": _num(s.slope), "lower": _num(s.lower),
             "upper": _num(s.upper)} for s in curve.segments]


def credit_curve_from_dict(data) -> CreditCurve:
    return CreditCurve(tuple(CreditSegment(float(d["intercept"]), float(d["slope"]), float(d["lower"]),
                                           float(d["upper"])) for d in data))


def technology_to_dict(tech: GeneratorSpec | StorageSpec) -> dict:
    if isinstance(tech, GeneratorSpec):
        return {"kind": "generator", "variable_cost": _num(tech.variable_cost),
                "annualized_capex": _num(tech.annualized_capex), "fixed_om": _num(tech.fixed_om),
                "emission_factor": _num(tech.emission_factor), "availability_key": tech.availability_key,
                "capacity_credit": _num(tech.capacity_credit)}
    return {"kind": "storage", "power_capex": _num(tech.power_capex), "power_fixed_om": _num(tech.power_fixed_om),
            "energy_capex": _num(tech.energy_capex), "energy_fixed_om": _num(tech.energy_fixed_om),
            "charge_efficiency": _num(tech.charge_efficiency),
            "discharge_efficiency": _num(tech.discharge_efficiency),
            "variable_cost": _num(tech.variable_cost),
            "credit_curve": None if tech.credit_curve is None else credit_curve_to_dict(tech.credit_curve)}


_GENERATOR_FIELDS = {"variable_cost", "annualized_capex", "fixed_om", "emission_factor", "availability_key",
                     "capacity_credit"}
_STORAGE_FIELDS = {"power_capex", "power_fixed_om", "energy_capex", "energy_fixed_om", "charge_efficiency",
                   "discharge_efficiency", "variable_cost", "credit_curve"}
_TABLE_FIELDS = {"power_capex_per_kw", "energy_capex_per_kwh", "fom_per_kw_yr", "energy_fom_per_kwh_yr",
                 "variable_cost", "lifetime", "wacc", "emission_factor", "availability_key",
                 "charge_efficiency", "discharge_efficiency"}


def technology_from_dict(name: str, data: Mapping[str, Any]) -> GeneratorSpec | StorageSpec:
    """Build a technology from its annualised or overnight-cost description."""
    data = dict(data)
    kind = data.pop("kind", None)
    if kind not in ("generator", "storage"):
        raise InputFormatError(f"technology {name!r}", [f"kind must be 'generator' or 'storage', got {kind!r}"])
    try:
        if "power_capex_per_kw" in data:
            unknown = set(data) - _TABLE_FIELDS
            if unknown:
                raise InputFormatError(f"technology {name!r}", [f"unknown field(s) {', '.join(sorted(unknown))}"])
            return technology_from_table(name, {"kind": kind, **data})
        if kind == "generator":
            unknown = set(data) - _GENERATOR_FIELDS
            if unknown:
                raise InputFormatError(f"technology {name!r}", [f"unknown field(s) {', '.join(sorted(unknown))}"])
            return GeneratorSpec(name=name, variable_cost=float(data["variable_cost"]),
                                 annualized_capex=float(data["annualized_capex"]), fixed_om=float(data["fixed_om"]),
                                 emission_factor=float(data.get("emission_factor", 0.0)),
                                 availability_key=data.get("availability_key"),
                                 capacity_credit=float(data.get("capacity_credit", 1.0)))
        unknown = set(data) - _STORAGE_FIELDS
        if unknown:
            raise InputFormatError(f"technology {name!r}", [f"unknown field(s) {', '.join(sorted(unknown))}"])
        curve = data.get("credit_curve")
        return StorageSpec(name=name, power_capex=float(data["power_capex"]),
                           power_fixed_om=float(data["power_fixed_om"]), energy_capex=float(data["energy_capex"]),
                           energy_fixed_om=float(data["energy_fixed_om"]),
                           charge_efficiency=float(data["charge_efficiency"]),
                           discharge_efficiency=float(data["discharge_efficiency"]),
                           variable_cost=float(data.get("variable_cost", 0.5)),
                           credit_curve=None if curve is None else credit_curve_from_dict(curve))
    except KeyError as exc:
        raise InputFormatError(f"technology {name!r}", [f"missing field {exc.args[0]!r}"]) from None
    except (TypeError, ValueError) as exc:
        if isinstance(exc, InputFormatError):
            raise
        raise InputFormatError(f"technology {name!r}", [str(exc)]) from None


def catalog_to_dict(catalog: TechnologyCatalog) -> dict:
    return {t.name: technology_to_dict(t) for t in (*catalog.generators, *catalog.storages)}


def catalog_from_dict(data: Mapping[str, Mapping]) -> TechnologyCatalog:
    if not isinstance(data, Mapping) or not data:
        raise InputFormatError("catalog", ["expected a non-empty mapping of technology name to fields"])
    return TechnologyCatalog().add(*(technology_from_dict(str(k), v) for k, v in data.items()))


def capacity_curve_to_dict(curve: CapacityDemandCurve) -> dict:
    return {"fixed_width": _num(curve.fixed_width), "flexible_widths": [_num(w) for w in curve.flexible_widths],
            "prices": [_num(p) for p in curve.prices]}


def capacity_curve_from_dict(data: Mapping) -> CapacityDemandCurve:
    return CapacityDemandCurve(float(data["fixed_width"]), tuple(float(w) for w in data["flexible_widths"]),
                               tuple(float(p) for p in data["prices"]))


def mix_to_dict(mix: FixedMix) -> dict:
    return {"generators": {k: _num(v) for k, v in mix.generators.items()},
            "storage_power": {k: _num(v) for k, v in mix.storage_power.items()},
            "storage_energy": {k: _num(v) for k, v in mix.storage_energy.items()}}


def mix_from_dict(data: Mapping) -> FixedMix:
    return FixedMix(dict(data.get("generators") or {}), dict(data.get("storage_power") or {}),
                    dict(data.get("storage_energy") or {}))


def design_to_dict(design: MarketDesign) -> dict:
    return {
        "run_mode": design.run_mode.value,
        "voll": _num(design.voll),
        "price_cap": _num(design.price_cap),
        "emission_cap": _num(design.emission_cap),
        "capacity_demand_curve": None if design.capacity_demand_curve is None
        else capacity_curve_to_dict(design.capacity_demand_curve),
        "fixed_capacities": None if design.fixed_capacities is None else mix_to_dict(design.fixed_capacities),
        "price_capped": bool(design.price_capped),
    }


def design_from_dict(data: Mapping) -> MarketDesign:
    curve = data.get("capacity_demand_curve")
    mix = data.get("fixed_capacities")
    try:
        mode = RunMode(data["run_mode"])
    except (KeyError, ValueError):
        raise InputFormatError("design", [f"run_mode must be one of {', '.join(m.value for m in RunMode)}"]) from None
    return MarketDesign(mode, voll=float(data.get("voll", 20300.0)), price_cap=float(data.get("price_cap", 7549.0)),
                        emission_cap=float(data.get("emission_cap", math.inf)),
                        capacity_demand_curve=None if curve is None else capacity_curve_from_dict(curve),
                        fixed_capacities=None if mix is None else mix_from_dict(mix),
                        price_capped=bool(data.get("price_capped", True)))


def scenario_set_to_dict(scenarios: ScenarioSet) -> dict:
    return {
        "horizon_hours": _num(scenarios.horizon_hours),
        "scenarios": [{
            "name": sc.name,
            "probability": _num(sc.probability),
            "durations": [float(v) for v in sc.durations],
            "fixed_demand": [float(v) for v in sc.fixed_demand],
            "flexible_demand": [float(v) for v in sc.flexible_demand],
            "availability": {k: [float(v) for v in arr] for k, arr in sc.availability.items()},
        } for sc in scenarios],
    }


def scenario_set_from_dict(data: Mapping) -> ScenarioSet:
    return ScenarioSet(tuple(
        Scenario(d["name"], float(d["probability"]), d["durations"], d["fixed_demand"], d["flexible_demand"],
                 dict(d.get("availability") or {}))
        for d in data["scenarios"]), float(data.get("horizon_hours", HORIZON_HOURS)))


# ---------------------------------------------------------------------------
# YAML


def dump_yaml(data, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(yaml.safe_dump(data, sort_keys=False), encoding="utf-8")
    return path


def load_yaml(path: str | Path):
    path = Path(path)
    try:
        return yaml.safe_load(path.read_text(encoding="utf-8"))
    except yaml.YAMLError as exc:
        raise InputFormatError(f"{path}: not valid YAML", [str(exc)]) from None


def read_catalog(path: str | Path) -> TechnologyCatalog:
    data = load_yaml(path)
    if isinstance(data, Mapping) and "technologies" in data:
        data = data["technologies"]
    return catalog_from_dict(data)


def write_catalog(catalog: TechnologyCatalog, path: str | Path) -> Path:
    return dump_yaml({"technologies": catalog_to_dict(catalog)}, path)
