"""Adequacy measurement: unserved energy, marginal capacity credits and
concave credit-curve fitting.

Credits are marginal: a small block of capacity is added to a fixed mix and
the resulting drop in expected unserved energy (EUE) is compared with the drop
produced by the same block of a perfectly available generator.
"""

from __future__ import annotations

import csv
import enum
import itertools
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np
from scipy.optimize import nnls

from .domain import (
    CreditCurve,
    CreditSegment,
    DemandMode,
    FixedMix,
    MarketDesign,
    RunMode,
    ScenarioSet,
    TechnologyCatalog,
    reference_generator,
)
from .planner import EquilibriumSolution, assemble, solve_equilibrium

logger = logging.getLogger(__name__)

DEFAULT_EPSILON = 0.01
DEFAULT_DURATIONS = (1, 2, 4, 6, 8, 12, 16, 24, 32, 48, 72, 96, 120, 168)
# a credit within this distance of one counts as saturated for grid truncation
SATURATION_TOLERANCE = 1e-4
# credits above 1 by more than this are reported as solver noise
NOISE_WARNING = 1e-3


class Paradigm(str, enum.Enum):
    """How pre-existing storage may react to a perturbation."""

    UNCONSTRAINED = "UNCONSTRAINED"
    CHARGING_FIXED = "CHARGING_FIXED"
    CHARGING_AND_DISCHARGING_FIXED = "CHARGING_AND_DISCHARGING_FIXED"


class AccreditationError(RuntimeError):
    """Raised when credits cannot be computed for the given inputs."""


# ---------------------------------------------------------------------------
# unserved energy


@dataclass(frozen=True)
class UnservedSeries:
    """Per-interval shortfall (MW) per scenario and its expectation (MWh/yr)."""

    shortfall: tuple[np.ndarray, ...]
    eue: float
    scenario_names: tuple[str, ...] = ()

    def resum(self, scenarios: ScenarioSet) -> float:
        return float(sum(sc.probability * float(sc.durations @ l)
                         for sc, l in zip(scenarios, self.shortfall)))


def shortfall_threshold(fixed_demand, flexible_demand, voll: float, price_cap: float):
    """Demand that must be served to avoid shortfall: the fixed block plus the
    part of the flexible block valued above the price cap."""
    return fixed_demand + flexible_demand * (voll - price_cap) / voll


def unserved_energy(solution: EquilibriumSolution, design: MarketDesign | None = None,
                    allow_uncapped: bool = False) -> UnservedSeries:
    """Shortfall of a dispatch solution against the price-cap threshold.

    Uncapped-demand solutions are rejected unless ``allow_uncapped`` is set, in
    which case the same threshold is applied so that EUE is comparable across
    runs.
    """
    design = design or solution.design
    if solution.design.demand_mode is DemandMode.UNCAPPED and not allow_uncapped:
        raise ValueError("unserved energy is defined on price-capped dispatch; "
                         "pass allow_uncapped=True to apply the same threshold")
    shortfall = []
    eue = 0.0
    for w_i, sc in enumerate(solution.scenarios):
        threshold = shortfall_threshold(sc.fixed_demand, sc.flexible_demand, design.voll, design.price_cap)
        l = np.maximum(0.0, threshold - solution.served(w_i))
        shortfall.append(l)
        eue += sc.probability * float(sc.durations @ l)
    return UnservedSeries(tuple(shortfall), eue, tuple(sc.name for sc in solution.scenarios))


# ---------------------------------------------------------------------------
# marginal credits


@dataclass(frozen=True)
class CreditEstimate:
    resource: str
    duration: float | None
    paradigm: Paradigm
    eue_0: float
    eue_ref: float
    eue_r: float
    credit: float

    @property
    def eue_reduction(self) -> float:
        return self.eue_0 - self.eue_r


@dataclass
class AccreditationResult:
    """Credits from one accreditation pass plus diagnostics."""

    paradigm: Paradigm
    epsilon: float
    eue_0: float
    eue_ref: float
    estimates: list[CreditEstimate] = field(default_factory=list)
    diagnostic: str = ""
    warnings: list[str] = field(default_factory=list)

    @property
    def credits_defined(self) -> bool:
        return not self.diagnostic

    def generator_credits(self) -> dict[str, float]:
        return {e.resource: e.credit for e in self.estimates if e.duration is None}

    def storage_points(self, name: str) -> list[tuple[float, float]]:
        return [(e.duration, e.credit) for e in self.estimates
                if e.resource == name and e.duration is not None]


def _accreditation_design(design: MarketDesign, mix: FixedMix) -> MarketDesign:
    return MarketDesign(
        RunMode.DISPATCH_FIXED_MIX,
        voll=design.voll,
        price_cap=design.price_cap,
        emission_cap=design.emission_cap,
        fixed_capacities=mix,
        price_capped=True,
    )


@dataclass(frozen=True)
class _Job:
    resource: str
    duration: float | None
    catalog: TechnologyCatalog
    mix: FixedMix


def _dispatch_eue(scenarios, catalog, design, mix, pins, tolerance) -> tuple[float, EquilibriumSolution]:
    program = assemble(scenarios, catalog, _accreditation_design(design, mix))
    for (kind, name, w_i), values in pins.items():
        target = program.index[kind][name]
        program.fix(target if w_i is None else target[w_i], values)
    solution = solve_equilibrium(program, tolerance=tolerance)
    return unserved_energy(solution, design).eue, solution


def _pins(baseline: EquilibriumSolution, paradigm: Paradigm) -> dict:
    keys = []
    if paradigm in (Paradigm.CHARGING_FIXED, Paradigm.CHARGING_AND_DISCHARGING_FIXED):
        keys.append(("ch", baseline.charge))
    if paradigm is Paradigm.CHARGING_AND_DISCHARGING_FIXED:
        # with both flows pinned the state of charge is determined up to the
        # (objective-neutral) initial level; pinning it too keeps the feasible
        # set from collapsing to a sliver the interior-point method cannot centre
        keys += [("dis", baseline.discharge), ("soc", baseline.soc)]
    pins = {}
    for kind, series in keys:
        for name, per_scenario in series.items():
            for w_i, values in enumerate(per_scenario):
                pins[(kind, name, w_i)] = np.asarray(values, dtype=float)
    if paradigm is Paradigm.CHARGING_AND_DISCHARGING_FIXED:
        for name, value in baseline.initial_soc.items():
            pins[("e_init", name, None)] = np.asarray(value, dtype=float)
    return pins


def _run_job(args) -> tuple[str, float | None, float]:
    job, scenarios, design, pins, tolerance = args
    eue, _ = _dispatch_eue(scenarios, job.catalog, design, job.mix, pins, tolerance)
    return job.resource, job.duration, eue


def _map(func, items, workers: int):
    if workers > 1 and len(items) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(func, items))
    return [func(item) for item in items]


def accredit(
    mix: FixedMix,
    scenarios: ScenarioSet,
    catalog: TechnologyCatalog,
    design: MarketDesign,
    epsilon: float = DEFAULT_EPSILON,
    durations=DEFAULT_DURATIONS,
    paradigm: Paradigm | str = Paradigm.UNCONSTRAINED,
    resources: list[str] | None = None,
    workers: int = 1,
    tolerance: float = 1e-9,
) -> AccreditationResult:
    """Marginal credits of every generator and of every storage at each duration.

    ``design`` supplies VOLL, the price cap and the emission cap; dispatch is
    always run with the price-capped demand. Each storage duration is tested as
    a separate new unit of ``epsilon`` MW with energy ``duration * epsilon /
    eta_dis`` so that it does not inherit the installed duration. The duration
    grid for a storage is truncated once two consecutive credits saturate.
    """
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    paradigm = Paradigm(paradigm)
    durations = sorted(float(z) for z in durations)
    names = catalog.names if resources is None else list(resources)
    ref = reference_generator()
    while ref.name in catalog.names:
        ref = replace(ref, name=ref.name + "_")

    eue_0, baseline = _dispatch_eue(scenarios, catalog, design, mix, {}, tolerance)
    pins = _pins(baseline, paradigm)

    ref_catalog = catalog.add(ref)
    eue_ref, _ = _dispatch_eue(scenarios, ref_catalog, design, mix.with_addition(ref.name, epsilon),
                               pins, tolerance)
    result = AccreditationResult(paradigm, epsilon, eue_0, eue_ref)
    reduction_ref = eue_0 - eue_ref
    if not reduction_ref > 1e-12 * max(1.0, abs(eue_0)):
        result.diagnostic = (
            f"reference EUE reduction {reduction_ref:.3e} is not positive (EUE_0={eue_0:.6g}); "
            "the system is scarcity-free or epsilon is too small to register"
        )
        return result

    def credit(eue_r: float) -> float:
        return (eue_0 - eue_r) / reduction_ref

    result.estimates.append(CreditEstimate(ref.name, None, paradigm, eue_0, eue_ref, eue_ref, 1.0))

    gen_jobs = []
    for name in names:
        if name in (g.name for g in catalog.generators):
            gen_jobs.append(_Job(name, None, catalog, mix.with_addition(name, epsilon)))
    for (resource, _, eue_r) in _map(_run_job, [(j, scenarios, design, pins, tolerance) for j in gen_jobs],
                                     workers):
        result.estimates.append(CreditEstimate(resource, None, paradigm, eue_0, eue_ref, eue_r, credit(eue_r)))

    for name in names:
        if name not in (s.name for s in catalog.storages):
            continue
        spec = catalog.storage(name)
        unit = replace(spec, name=f"{name}+unit", credit_curve=None)
        unit_catalog = catalog.add(unit)
        # evaluate in small batches so truncation can stop the sweep early
        batch = max(1, workers)
        saturated = 0
        for start in range(0, len(durations), batch):
            chunk = durations[start:start + batch]
            jobs = [(_Job(name, z, unit_catalog,
                          mix.with_addition(unit.name, epsilon, spec.energy_for(epsilon, z))),
                     scenarios, design, pins, tolerance) for z in chunk]
            done = False
            for (_, z, eue_r) in _map(_run_job, jobs, workers):
                cc = credit(eue_r)
                result.estimates.append(CreditEstimate(name, z, paradigm, eue_0, eue_ref, eue_r, cc))
                saturated = saturated + 1 if cc >= 1.0 - SATURATION_TOLERANCE else 0
                if saturated >= 2:
                    done = True
                    break
            if done:
                break

    for e in result.estimates:
        if e.credit > 1.0 + NOISE_WARNING:
            result.warnings.append(f"credit {e.credit:.6f} of {e.resource} exceeds one (solver noise)")
    result.estimates.sort(key=lambda e: (e.resource, -1.0 if e.duration is None else e.duration))
    return result


# ---------------------------------------------------------------------------
# credit-curve fitting


@dataclass(frozen=True)
class CreditFit:
    curve: CreditCurve
    r_squared: float
    knots: tuple[float, ...]
    warning: bool = False
    message: str = ""


def _basis(x: np.ndarray, knots) -> np.ndarray:
    cols = [np.ones_like(x), x] + [np.minimum(x, k) for k in knots]
    return np.column_stack(cols)


def fit_credit_curve(points, segment_count: int = 4) -> CreditFit:
    """Least-squares concave, non-decreasing piecewise-linear fit.

    The curve is written as ``a + s x + sum_k g_k min(x, knot_k)`` with all
    coefficients non-negative, which makes it continuous, concave,
    non-decreasing and non-negative at zero duration. Knots are chosen among the
    interior data durations by exhaustive search. ``warning`` is set when the
    shape constraints bind, i.e. the data are not themselves concave and
    monotone.
    """
    pts = sorted((float(x), float(y)) for x, y in points)
    if segment_count < 1:
        raise ValueError("segment_count must be at least 1")
    if len(pts) < segment_count + 1:
        raise ValueError(f"need at least {segment_count + 1} points for {segment_count} segments")
    x = np.array([p[0] for p in pts])
    y = np.array([p[1] for p in pts])
    if np.any(np.diff(x) <= 0):
        raise ValueError("durations must be strictly increasing")

    interior = x[1:-1]
    best = None
    for knots in itertools.combinations(interior.tolist(), segment_count - 1):
        M = _basis(x, knots)
        coef, _ = nnls(M, y)
        sse = float(np.sum((M @ coef - y) ** 2))
        if best is None or sse < best[0] - 1e-15:
            best = (sse, knots, coef)
    sse, knots, coef = best

    free, *_ = np.linalg.lstsq(_basis(x, knots), y, rcond=None)
    free_sse = float(np.sum((_basis(x, knots) @ free - y) ** 2))
    warning = sse > free_sse + 1e-10 * max(1.0, float(y @ y))

    a, s, g = coef[0], coef[1], coef[2:]
    bounds = [0.0, *knots, math.inf]
    segments = []
    for j in range(segment_count):
        slope = s + float(np.sum(g[j:]))
        # value at zero of the j-th line: a + sum of g_k*knot_k for knots left of it
        intercept = a + float(np.sum(g[:j] * np.asarray(knots[:j])))
        segments.append(CreditSegment(intercept, slope, bounds[j], bounds[j + 1]))
    curve = CreditCurve(tuple(segments))

    # judge the curve as it is used: minimum of lines, clipped to [0, 1]
    resid = curve.evaluate(x) - y
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(resid @ resid) / ss_tot if ss_tot > 0 else float(np.allclose(resid, 0.0))
    message = "credit points are not concave and non-decreasing; best shape-constrained fit returned" if warning else ""
    if warning:
        logger.warning(message)
    return CreditFit(curve, r2, tuple(knots), warning, message)


# ---------------------------------------------------------------------------
# export


def write_credits(results, out_dir, tag: str = "") -> Path:
    """credits.csv: one row per (resource, duration, paradigm) estimate.

    ``results`` is one AccreditationResult or an iterable of them; generator
    rows leave ``duration_h`` empty.
    """
    if isinstance(results, AccreditationResult):
        results = [results]
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    p = out / (f"{tag}_credits.csv" if tag else "credits.csv")
    with p.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["resource", "duration_h", "paradigm", "EUE_0", "EUE_ref", "EUE_r", "credit"])
        for res in results:
            for e in res.estimates:
                w.writerow([e.resource, "" if e.duration is None else _f(e.duration), e.paradigm.value,
                            _f(e.eue_0), _f(e.eue_ref), _f(e.eue_r), _f(e.credit)])
    return p


def write_credit_curves(fits, out_dir, tag: str = "") -> Path:
    """credit_curves.csv: per storage and segment the intercept, slope,
    duration range and the fit's R²."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    p = out / (f"{tag}_credit_curves.csv" if tag else "credit_curves.csv")
    with p.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["resource", "segment", "alpha", "beta_per_h", "duration_lower_h", "duration_upper_h",
                    "r_squared", "shape_warning"])
        for name in sorted(fits):
            fit = fits[name]
            for n, seg in enumerate(fit.curve.segments, start=1):
                w.writerow([name, n, _f(seg.intercept), _f(seg.slope), _f(seg.lower), _f(seg.upper),
                            _f(fit.r_squared), int(fit.warning)])
    return p


def _f(v) -> str:
    return repr(float(v))
