"""Capacity-market calibration: net-CONE, required credits, the capacity
target and the administrative capacity demand curve."""

from __future__ import annotations

import csv
import enum
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping

import numpy as np

from .domain import (
    CapacityDemandCurve,
    CreditCurve,
    FixedMix,
    GeneratorSpec,
    TechnologyCatalog,
)
from .planner import EquilibriumSolution, energy_margin

REFERENCE_TECHNOLOGY = "ccgt_ccs"
# capacities below this fraction of peak fixed demand count as not installed
INSTALLED_FRACTION = 1e-4
# reference shortfalls below this share of its gross cost are treated as zero
NO_MISSING_MONEY_TOLERANCE = 1e-4

# demand-curve template in per-mille: (quantity share of the target, price share of net-CONE);
# integer factors keep breakpoints such as 1.035 x 100 = 103.5 exact in floating point
CURVE_TEMPLATE = ((965, 1500), (1000, 1000), (1035, 0))


class CalibrationError(ValueError):
    """Calibration inputs are inconsistent (missing credits, bad curve inputs)."""


class NetConeStatus(str, enum.Enum):
    OK = "OK"
    NO_MISSING_MONEY = "NO_MISSING_MONEY"


@dataclass(frozen=True)
class NetConeRecord:
    """Per-MW-installed economics of one technology under the capped benchmark dispatch."""

    technology: str
    installed: float
    gross_cost: float
    net_revenue: float
    net_cone_uncredited: float
    net_cone_credited: float | None = None
    required_credit: float | None = None
    estimated_credit: float | None = None


@dataclass(frozen=True)
class NetConeResult:
    records: tuple[NetConeRecord, ...]
    reference: str
    reference_net_cone: float
    status: NetConeStatus

    def __getitem__(self, name: str) -> NetConeRecord:
        for rec in self.records:
            if rec.technology == name:
                return rec
        raise KeyError(name)

    @property
    def has_missing_money(self) -> bool:
        return self.status is NetConeStatus.OK


def installed_threshold(solution_or_peak) -> float:
    peak = solution_or_peak if np.isscalar(solution_or_peak) else solution_or_peak.scenarios.peak_fixed_demand()
    return INSTALLED_FRACTION * float(peak)


def _gross_and_revenue(solution: EquilibriumSolution, name: str, mix: FixedMix, tol: float):
    """Gross cost and expected energy net revenue per installed MW, or revenue
    per marginal MW when the technology is absent (generators only)."""
    tech = solution.catalog.get(name)
    probs = np.array([sc.probability for sc in solution.scenarios])
    if isinstance(tech, GeneratorSpec):
        cap = mix.generators.get(name, 0.0)
        if cap > tol:
            return cap, tech.annual_cost, float(probs @ energy_margin(solution, name)) / cap
        revenue = 0.0
        for w_i, sc in enumerate(solution.scenarios):
            unit = solution.energy_price[w_i] - tech.variable_cost - solution.carbon_price * tech.emission_factor
            avail = sc.availability_of(tech.availability_key)
            revenue += sc.probability * float(np.sum(sc.durations * avail * np.maximum(unit, 0.0)))
        return cap, tech.annual_cost, revenue
    power = mix.storage_power.get(name, 0.0)
    if power <= tol:
        return power, None, None
    energy = mix.storage_energy.get(name, 0.0)
    # per installed MW of the composite asset: energy capex scaled by energy per MW
    gross = tech.power_cost + tech.energy_cost * energy / power
    return power, gross, float(probs @ energy_margin(solution, name)) / power


def net_cone(
    benchmark_mix: FixedMix,
    capped_solution: EquilibriumSolution,
    catalog: TechnologyCatalog | None = None,
    reference: str = REFERENCE_TECHNOLOGY,
    estimated_credits: Mapping[str, float] | None = None,
) -> NetConeResult:
    """Net cost of new entry of every technology against capped benchmark prices.

    ``capped_solution`` is the price-capped dispatch of ``benchmark_mix``.
    Required credits ``NC_r / NC_ref`` are reported for installed technologies.
    When the reference recovers its costs (``NC_ref <= 0``) the result carries
    ``NO_MISSING_MONEY`` and no required credits.
    """
    catalog = catalog or capped_solution.catalog
    if reference not in catalog.names:
        raise CalibrationError(f"reference technology {reference!r} is not in the catalog")
    tol = installed_threshold(capped_solution)
    estimated_credits = estimated_credits or {}

    raw = {}
    for name in catalog.names:
        raw[name] = _gross_and_revenue(capped_solution, name, benchmark_mix, tol)
    _, ref_gross, ref_rev = raw[reference]
    nc_ref = ref_gross - ref_rev
    # shortfalls within the zero-profit tolerance are not missing money
    status = NetConeStatus.OK if nc_ref > NO_MISSING_MONEY_TOLERANCE * ref_gross else NetConeStatus.NO_MISSING_MONEY

    records = []
    for name in catalog.names:
        installed, gross, revenue = raw[name]
        if gross is None:
            records.append(NetConeRecord(name, installed, float("nan"), float("nan"), float("nan"),
                                         estimated_credit=estimated_credits.get(name)))
            continue
        nc = gross - revenue
        est = estimated_credits.get(name)
        credited = nc / est if est not in (None, 0.0) else None
        required = nc / nc_ref if status is NetConeStatus.OK and installed > tol else None
        records.append(NetConeRecord(name, installed, gross, revenue, nc, credited, required, est))
    return NetConeResult(tuple(records), reference, nc_ref, status)


def capacity_target(
    benchmark_mix: FixedMix,
    catalog: TechnologyCatalog,
    generator_credits: Mapping[str, float],
    storage_curves: Mapping[str, CreditCurve],
    installed_tolerance: float = 0.0,
) -> float:
    """Accredited capacity of the benchmark mix.

    Storage is credited through its curve at the installed duration. Only
    technologies above ``installed_tolerance`` count; each of them needs a
    credit.
    """
    total = 0.0
    for g in catalog.generators:
        cap = benchmark_mix.generators.get(g.name, 0.0)
        if cap <= installed_tolerance:
            continue
        if g.name not in generator_credits:
            raise CalibrationError(f"no capacity credit for installed generator {g.name!r}")
        total += float(generator_credits[g.name]) * cap
    for s in catalog.storages:
        power = benchmark_mix.storage_power.get(s.name, 0.0)
        if power <= installed_tolerance:
            continue
        if s.name not in storage_curves:
            raise CalibrationError(f"no credit curve for installed storage {s.name!r}")
        duration = s.duration(power, benchmark_mix.storage_energy.get(s.name, 0.0))
        total += storage_curves[s.name](duration) * power
    return total


def build_cm_demand_curve(capacity_target: float, reference_net_cone: float) -> CapacityDemandCurve:
    """Flat at 1.5x net-CONE to 96.5% of the target, then two linear pieces
    through (target, net-CONE) down to zero at 103.5% of the target."""
    if not capacity_target > 0:
        raise CalibrationError(f"capacity target must be positive, got {capacity_target}")
    if not reference_net_cone > 0:
        raise CalibrationError(f"reference net-CONE must be positive, got {reference_net_cone}")
    qs = [capacity_target * q / 1000 for q, _ in CURVE_TEMPLATE]
    ps = [reference_net_cone * p / 1000 for _, p in CURVE_TEMPLATE]
    return CapacityDemandCurve(
        fixed_width=qs[0],
        flexible_widths=(qs[1] - qs[0], qs[2] - qs[1]),
        prices=tuple(ps),
    )


def zero_price_curve(width: float) -> CapacityDemandCurve:
    """A capacity demand curve that values nothing; clears at price zero."""
    w = max(float(width), 1.0)
    return CapacityDemandCurve(fixed_width=0.965 * w, flexible_widths=(0.035 * w, 0.035 * w),
                               prices=(0.0, 0.0, 0.0))


def write_calibration(result: NetConeResult, out_dir: str | Path, tag: str = "") -> Path:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    p = out / (f"{tag}_calibration.csv" if tag else "calibration.csv")
    with p.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["technology", "installed_mw", "gross_cost_usd_mw_yr", "energy_net_revenue_usd_mw_yr",
                    "net_cone_uncredited", "net_cone_credited", "cc_required", "cc_estimated"])
        for r in result.records:
            w.writerow([r.technology, _f(r.installed), _f(r.gross_cost), _f(r.net_revenue),
                        _f(r.net_cone_uncredited), _f(r.net_cone_credited), _f(r.required_credit),
                        _f(r.estimated_credit)])
    return p


def write_cm_curve(curve: CapacityDemandCurve, out_dir: str | Path, tag: str = "") -> Path:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    p = out / (f"{tag}_cm_curve.csv" if tag else "cm_curve.csv")
    with p.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["segment", "start_mw", "end_mw", "start_price", "end_price"])
        w.writerow(["flat", _f(0.0), _f(curve.fixed_width), _f(curve.prices[0]), _f(curve.prices[0])])
        x = curve.fixed_width
        for n, width in enumerate(curve.flexible_widths):
            w.writerow([f"slope_{n + 1}", _f(x), _f(x + width), _f(curve.prices[n]), _f(curve.prices[n + 1])])
            x += width
    return p


def _f(v) -> str:
    return "" if v is None else repr(float(v))
