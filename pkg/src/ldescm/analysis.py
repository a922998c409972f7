"""Experiment harness and metrics.

``run_suite`` executes the benchmark, the capped re-dispatch of the benchmark
mix, accreditation and calibration, and the two capped market designs. The
remaining functions turn solved runs into welfare, revenue and price metrics.
"""

from __future__ import annotations

import csv
import enum
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping

import numpy as np

from . import accreditation as acc
from .calibration import (
    REFERENCE_TECHNOLOGY,
    CalibrationError,
    NetConeResult,
    NetConeStatus,
    build_cm_demand_curve,
    capacity_target,
    installed_threshold,
    net_cone,
    write_calibration,
    write_cm_curve,
    zero_price_curve,
)
from .domain import (
    CapacityDemandCurve,
    CreditCurve,
    DemandMode,
    FixedMix,
    GeneratorSpec,
    MarketDesign,
    RunMode,
    ScenarioSet,
    TechnologyCatalog,
)
from .planner import (
    EquilibriumError,
    EquilibriumSolution,
    annualized_cost,
    assemble,
    energy_margin,
    solve_equilibrium,
    write_solution,
)

logger = logging.getLogger(__name__)


class RunName(str, enum.Enum):
    EOM_VOLL = "EOM_VOLL"
    EOM_PC_OPT_MIX = "EOM_PC_OPT_MIX"
    E_PLUS_CM = "E_PLUS_CM"
    EOM_PC = "EOM_PC"


class SuiteError(RuntimeError):
    """A run of the suite failed; ``run`` names which one."""

    def __init__(self, run: str, cause: Exception):
        super().__init__(f"{run}: {cause}")
        self.run = run
        self.cause = cause


@dataclass(frozen=True)
class SuiteSettings:
    voll: float = 20300.0
    price_cap: float = 7549.0
    emission_cap: float = math.inf
    epsilon: float = acc.DEFAULT_EPSILON
    durations: tuple[float, ...] = acc.DEFAULT_DURATIONS
    paradigm: acc.Paradigm = acc.Paradigm.UNCONSTRAINED
    diagnostic_paradigms: bool = False
    segment_count: int = 4
    reference: str = REFERENCE_TECHNOLOGY
    workers: int = 1
    tolerance: float = 1e-8
    redispatch: bool = True

    def design(self, mode: RunMode, **kwargs) -> MarketDesign:
        return MarketDesign(mode, voll=self.voll, price_cap=self.price_cap,
                            emission_cap=self.emission_cap, **kwargs)


# ---------------------------------------------------------------------------
# welfare


@dataclass(frozen=True)
class WelfareReport:
    """True social welfare of a dispatch, valued against the uncapped WTP."""

    consumer_benefit: float
    capital_cost: float
    variable_cost: float
    eue: float
    expected_demand: float
    benchmark_total_cost: float | None = None
    benchmark_welfare: float | None = None

    @property
    def total_cost(self) -> float:
        return self.capital_cost + self.variable_cost

    @property
    def welfare(self) -> float:
        return self.consumer_benefit - self.total_cost

    @property
    def eue_share(self) -> float:
        """EUE as a fraction of expected total demand."""
        return self.eue / self.expected_demand if self.expected_demand > 0 else 0.0

    @property
    def welfare_loss_pct(self) -> float | None:
        """Welfare shortfall versus the benchmark, % of benchmark total cost."""
        if self.benchmark_welfare is None or not self.benchmark_total_cost:
            return None
        return 100.0 * (self.benchmark_welfare - self.welfare) / self.benchmark_total_cost

    def against(self, benchmark: "WelfareReport") -> "WelfareReport":
        return WelfareReport(self.consumer_benefit, self.capital_cost, self.variable_cost, self.eue,
                             self.expected_demand, benchmark.total_cost, benchmark.welfare)


def true_consumer_benefit(solution: EquilibriumSolution, voll: float | None = None) -> float:
    """Expected benefit of the served energy under the uncapped WTP.

    Served energy is valued with efficient rationing: the fixed block first,
    then the linear block from the top.
    """
    voll = solution.design.voll if voll is None else voll
    total = 0.0
    for w_i, sc in enumerate(solution.scenarios):
        served = solution.served(w_i)
        fix = np.minimum(served, sc.fixed_demand)
        flex = np.clip(served - sc.fixed_demand, 0.0, sc.flexible_demand)
        safe = np.where(sc.flexible_demand > 0, sc.flexible_demand, 1.0)
        value = voll * fix + voll * (flex - np.where(sc.flexible_demand > 0, flex**2 / (2.0 * safe), 0.0))
        total += sc.probability * float(sc.durations @ value)
    return total


def proportional_consumer_benefit(solution: EquilibriumSolution) -> float:
    """Expected true benefit when shortfall in the capped flat block is shared
    pro rata.

    Under a price cap the flat block bundles fixed demand (worth VOLL) with the
    flexible consumers valued between the cap and VOLL; without a price signal
    between the two, a shortfall cuts every consumer of the block by the same
    fraction. The linear block below the cap is valued at the true WTP. For
    uncapped solutions this equals :func:`true_consumer_benefit`.
    """
    design = solution.design
    if design.demand_mode is DemandMode.UNCAPPED or design.price_cap >= design.voll:
        return true_consumer_benefit(solution)
    voll, pc = design.voll, design.price_cap
    total = 0.0
    for w_i, sc in enumerate(solution.scenarios):
        shift = sc.flexible_demand * (voll - pc) / voll
        block = sc.fixed_demand + shift
        block_value = voll * sc.fixed_demand + shift * (voll + pc) / 2.0
        share = np.divide(solution.served_fixed[w_i], block, out=np.zeros_like(block), where=block > 0)
        y = np.asarray(solution.served_flexible[w_i], dtype=float)
        safe = np.where(sc.flexible_demand > 0, sc.flexible_demand, 1.0)
        lower = pc * y - np.where(sc.flexible_demand > 0, voll * y**2 / (2.0 * safe), 0.0)
        total += sc.probability * float(sc.durations @ (np.minimum(share, 1.0) * block_value + lower))
    return total


def system_costs(solution: EquilibriumSolution) -> tuple[float, float]:
    """(annualised capital + fixed O&M, expected variable cost)."""
    cat = solution.catalog
    capital = sum(annualized_cost(solution, name) for name in cat.names)
    variable = 0.0
    for w_i, sc in enumerate(solution.scenarios):
        wd = sc.probability * sc.durations
        for g in cat.generators:
            variable += g.variable_cost * float(wd @ solution.generation[g.name][w_i])
        for s in cat.storages:
            variable += s.variable_cost * float(wd @ solution.discharge[s.name][w_i])
    return capital, variable


def welfare(solution: EquilibriumSolution, eue: float | None = None, proportional: bool = False) -> WelfareReport:
    """True welfare; shortfall is rationed efficiently unless ``proportional``."""
    if eue is None:
        eue = acc.unserved_energy(solution, allow_uncapped=True).eue
    capital, variable = system_costs(solution)
    benefit = proportional_consumer_benefit(solution) if proportional else true_consumer_benefit(solution)
    return WelfareReport(benefit, capital, variable, eue, solution.scenarios.expected_demand())


@dataclass(frozen=True)
class WelfarePair:
    """Welfare of a capped run as dispatched with shortfall shared pro rata, and
    after discharge-only re-dispatch against the true WTP with efficient rationing."""

    inefficient_distribution: WelfareReport
    perfect_rationing: WelfareReport
    redispatched: EquilibriumSolution


def redispatch_true_wtp(solution: EquilibriumSolution, tolerance: float = 1e-8) -> WelfarePair:
    """Re-solve a capped run with generation and charging frozen.

    Charging is pinned and generation may not exceed its dispatched level;
    storage discharge (with the implied state of charge) and consumption move,
    and demand is valued at the true WTP. The original point stays feasible,
    so the re-dispatch can only raise true welfare.
    """
    design = solution.design
    mix = solution.fixed_mix()
    redesign = MarketDesign(RunMode.DISPATCH_FIXED_MIX, voll=design.voll, price_cap=design.price_cap,
                            emission_cap=design.emission_cap, fixed_capacities=mix, price_capped=False)
    program = assemble(solution.scenarios, solution.catalog, redesign)
    # output is frozen as a ceiling: spilling is allowed, which keeps the
    # feasible set from collapsing where surplus exactly fills demand and charging
    for g in solution.catalog.generators:
        for w_i in range(len(solution.scenarios)):
            idx = program.index["q"][g.name][w_i]
            program.upper[idx] = np.minimum(program.upper[idx], np.maximum(solution.generation[g.name][w_i], 0.0))
    for s in solution.catalog.storages:
        for w_i in range(len(solution.scenarios)):
            program.fix(program.index["ch"][s.name][w_i], solution.charge[s.name][w_i])
    try:
        again = solve_equilibrium(program, tolerance=tolerance)
    except EquilibriumError as exc:  # the original point is feasible, so this is numerical
        raise SuiteError("redispatch", exc) from exc
    return WelfarePair(welfare(solution, proportional=True), welfare(again), again)


# ---------------------------------------------------------------------------
# storage book value and revenue attribution


@dataclass(frozen=True)
class BookValueSeries:
    """Average acquisition cost of stored energy after each interval."""

    phi: np.ndarray
    phi_0: float
    iterations: int
    residual: float
    converged: bool

    @property
    def phi_start(self) -> np.ndarray:
        """Book value at the start of each interval (``phi_{t-1}``)."""
        return np.concatenate(([self.phi_0], self.phi[:-1]))


def _book_sweep(phi_0, charge, discharge, soc, prices, durations, e_init, eta_dis, zero_tol):
    phi = np.empty(len(soc))
    prev_phi, prev_e = phi_0, e_init
    for t in range(len(soc)):
        e = soc[t]
        if e <= zero_tol:
            phi[t] = prev_phi
        else:
            kept = prev_e - durations[t] * discharge[t] / eta_dis
            phi[t] = (prev_phi * kept + prices[t] * durations[t] * charge[t]) / e
        prev_phi, prev_e = phi[t], e
    return phi


def book_value(charge, discharge, soc, prices, durations, e_init: float, discharge_efficiency: float,
               max_iterations: int = 100, tolerance: float = 1e-6) -> BookValueSeries:
    """Book value of stored energy with a cyclic start value.

    The end-of-horizon value is an affine function of the start value, so
    after the first sweeps from zero the fixed point is located by a secant
    step and confirmed by a further sweep. Intervals with (numerically) empty
    storage carry the previous value forward.
    """
    charge, discharge, soc, prices, durations = (np.asarray(a, dtype=float)
                                                 for a in (charge, discharge, soc, prices, durations))
    zero_tol = 1e-9 * max(1.0, float(np.max(soc, initial=0.0)), float(e_init))

    def sweep(p0):
        return _book_sweep(p0, charge, discharge, soc, prices, durations, float(e_init),
                           discharge_efficiency, zero_tol)

    p0 = 0.0
    phi = sweep(p0)
    history = [(p0, phi[-1])]
    it = 1
    while True:
        end = phi[-1]
        residual = abs(p0 - end)
        if residual <= tolerance * max(1.0, abs(end)):
            return BookValueSeries(phi, p0, it, residual, True)
        if it >= max_iterations:
            return BookValueSeries(phi, p0, it, residual, False)
        if len(history) >= 2 and history[-1][0] != history[-2][0]:
            (x0, y0), (x1, y1) = history[-2], history[-1]
            slope = (y1 - y0) / (x1 - x0)
            p0 = (y1 - slope * x1) / (1.0 - slope) if abs(1.0 - slope) > 1e-14 else y1
        else:
            p0 = end
        phi = sweep(p0)
        history.append((p0, phi[-1]))
        it += 1


def storage_net_revenue(book: BookValueSeries, discharge, prices, discharge_efficiency: float) -> np.ndarray:
    """Operating net revenue per interval ($/h): discharge valued at price less
    the book cost of the energy withdrawn."""
    if not book.converged:
        raise ValueError("book value did not converge; net revenue is not attributable")
    return np.asarray(discharge, dtype=float) * (np.asarray(prices, dtype=float)
                                                 - book.phi_start / discharge_efficiency)


def storage_book_values(solution: EquilibriumSolution, name: str, **kwargs) -> list[BookValueSeries]:
    spec = solution.catalog.storage(name)
    out = []
    for w_i, sc in enumerate(solution.scenarios):
        out.append(book_value(solution.charge[name][w_i], solution.discharge[name][w_i], solution.soc[name][w_i],
                              solution.energy_price[w_i], sc.durations, solution.initial_soc[name],
                              spec.discharge_efficiency, **kwargs))
    return out


@dataclass(frozen=True)
class Reconciliation:
    scenario: str
    attributed: float
    margin: float
    terminal_term: float

    @property
    def relative_gap(self) -> float:
        return abs(self.attributed - self.margin) / max(1.0, abs(self.margin))


def reconcile_storage(solution: EquilibriumSolution, name: str,
                      books: list[BookValueSeries] | None = None) -> list[Reconciliation]:
    """Compare attributed net revenue with the plain arbitrage margin per scenario.

    ``terminal_term`` is ``phi_0 * (e_T - e_init)``, the value of energy left in
    store above the starting level; the two totals differ by exactly this term.
    """
    spec = solution.catalog.storage(name)
    books = books or storage_book_values(solution, name)
    out = []
    for w_i, sc in enumerate(solution.scenarios):
        lam = solution.energy_price[w_i]
        dis, ch = solution.discharge[name][w_i], solution.charge[name][w_i]
        pi = storage_net_revenue(books[w_i], dis, lam, spec.discharge_efficiency)
        margin = float(sc.durations @ (lam * (dis - ch)))
        term = books[w_i].phi_0 * (solution.soc[name][w_i][-1] - solution.initial_soc[name])
        out.append(Reconciliation(sc.name, float(sc.durations @ pi), margin, float(term)))
    return out


# ---------------------------------------------------------------------------
# missing money


@dataclass(frozen=True)
class RevenueSplit:
    technology: str
    below_cap: float
    at_cap: float
    capacity: float
    annualized_cost: float

    @property
    def energy(self) -> float:
        return self.below_cap + self.at_cap

    @property
    def total(self) -> float:
        return self.energy + self.capacity

    def recovery(self) -> dict[str, float]:
        c = self.annualized_cost
        if c <= 0:
            return {"below_cap": float("nan"), "at_cap": float("nan"), "capacity": float("nan"),
                    "total": float("nan")}
        return {"below_cap": self.below_cap / c, "at_cap": self.at_cap / c, "capacity": self.capacity / c,
                "total": self.total / c}


def at_cap_mask(prices, price_cap: float) -> np.ndarray:
    """Intervals counted as priced at the cap (interior duals approach it from below)."""
    return np.asarray(prices) >= price_cap - 1e-3 * price_cap


def missing_money_split(solution: EquilibriumSolution, books: Mapping[str, list[BookValueSeries]] | None = None,
                        ) -> list[RevenueSplit]:
    """Expected net revenue of each installed technology split by whether the
    interval price was below or at the cap, next to its annualised cost.

    Generators earn ``(price - variable cost - carbon cost) * output``; storage
    earns its book-value net revenue less discharge variable cost.
    """
    books = dict(books or {})
    tol = installed_threshold(solution)
    pc = solution.design.price_cap
    out = []
    for tech in list(solution.catalog.generators) + list(solution.catalog.storages):
        name = tech.name
        size = solution.capacity[name] if isinstance(tech, GeneratorSpec) else solution.storage_power[name]
        if size <= tol:
            continue
        below = at = 0.0
        for w_i, sc in enumerate(solution.scenarios):
            lam = solution.energy_price[w_i]
            if isinstance(tech, GeneratorSpec):
                unit = (lam - tech.variable_cost - solution.carbon_price * tech.emission_factor)
                per = unit * solution.generation[name][w_i]
            else:
                if name not in books:
                    books[name] = storage_book_values(solution, name)
                dis = solution.discharge[name][w_i]
                per = storage_net_revenue(books[name][w_i], dis, lam, tech.discharge_efficiency) \
                    - tech.variable_cost * dis
            per = sc.probability * sc.durations * per
            mask = at_cap_mask(lam, pc)
            at += float(per[mask].sum())
            below += float(per[~mask].sum())
        cm = solution.cm_contracted.get(name, 0.0) * solution.capacity_price
        out.append(RevenueSplit(name, below, at, cm, annualized_cost(solution, name)))
    return out


# ---------------------------------------------------------------------------
# prices and consumer costs


@dataclass(frozen=True)
class PriceMetrics:
    mu_price: float
    mu_price_time_weighted: float
    sigma_cv: float
    sigma_cv_hourly: float
    kappa_ccc: float
    beta_eb: float
    scenario_mean_prices: tuple[float, ...]
    energy_cost: float
    capacity_cost: float
    storage_net_revenue: dict[str, tuple[float, ...]] = field(default_factory=dict)


def price_and_cost_metrics(solution: EquilibriumSolution) -> PriceMetrics:
    """Average prices, their inter-annual variability and consumer cost adders.

    ``mu_price`` weights prices by served energy; the time-weighted variant is
    also reported. ``sigma_cv`` is the (population) coefficient of variation of
    per-scenario served-energy-weighted average prices. Capacity cost and the
    emission benefit are per MWh of expected served energy.
    """
    scen = solution.scenarios
    probs = np.array([sc.probability for sc in scen])
    served_e, spend, hours, time_spend, means = [], [], [], [], []
    for w_i, sc in enumerate(scen):
        q = solution.served(w_i)
        lam = solution.energy_price[w_i]
        e = float(sc.durations @ q)
        s = float(sc.durations @ (lam * q))
        served_e.append(e)
        spend.append(s)
        hours.append(float(sc.durations.sum()))
        time_spend.append(float(sc.durations @ lam))
        means.append(s / e if e > 0 else 0.0)
    served_e, spend = np.array(served_e), np.array(spend)
    expected_energy = float(probs @ served_e)
    mu = float(probs @ spend) / expected_energy if expected_energy > 0 else 0.0
    mu_t = float(probs @ np.array(time_spend)) / float(probs @ np.array(hours))

    means_arr = np.array(means)
    avg = float(probs @ means_arr)
    sigma = float(np.sqrt(probs @ (means_arr - avg) ** 2)) / avg if avg > 0 else 0.0
    all_p = np.concatenate(solution.energy_price)
    all_w = np.concatenate([sc.probability * sc.durations for sc in scen])
    hm = float(all_w @ all_p) / float(all_w.sum())
    sigma_h = float(np.sqrt(all_w @ (all_p - hm) ** 2 / all_w.sum())) / hm if hm > 0 else 0.0

    cm_volume = sum(solution.cm_contracted.values())
    capacity_cost = solution.capacity_price * cm_volume
    kappa = capacity_cost / expected_energy if expected_energy > 0 else 0.0
    cap = solution.design.emission_cap
    beta = solution.carbon_price * cap / expected_energy if math.isfinite(cap) and expected_energy > 0 else 0.0

    per_storage = {}
    tol = installed_threshold(solution)
    for s in solution.catalog.storages:
        if solution.storage_power[s.name] <= tol:
            continue
        cm_rev = solution.cm_contracted.get(s.name, 0.0) * solution.capacity_price
        cost = annualized_cost(solution, s.name)
        per_storage[s.name] = tuple(float(m) + cm_rev - cost for m in energy_margin(solution, s.name))
    return PriceMetrics(mu, mu_t, sigma, sigma_h, kappa, beta, tuple(means), float(probs @ spend),
                        capacity_cost, per_storage)


# ---------------------------------------------------------------------------
# the suite


@dataclass
class RunRecord:
    name: RunName
    solution: EquilibriumSolution
    unserved: acc.UnservedSeries
    welfare: WelfareReport


@dataclass
class Calibration:
    accreditation: acc.AccreditationResult
    diagnostics: dict[str, acc.AccreditationResult]
    fits: dict[str, acc.CreditFit]
    generator_credits: dict[str, float]
    storage_curves: dict[str, CreditCurve]
    net_cone: NetConeResult
    capacity_target: float
    curve: CapacityDemandCurve
    notes: list[str] = field(default_factory=list)

    def credited_catalog(self, catalog: TechnologyCatalog, storage_scale: float = 1.0) -> TechnologyCatalog:
        curves = {k: (v.scaled(storage_scale) if storage_scale != 1.0 else v) for k, v in self.storage_curves.items()}
        return catalog.with_credits(self.generator_credits, curves)


@dataclass
class RunSuite:
    scenarios: ScenarioSet
    catalog: TechnologyCatalog
    settings: SuiteSettings
    runs: dict[RunName, RunRecord]
    calibration: Calibration
    # EOM_PC_OPT_MIX valued as dispatched and after discharge-only re-dispatch
    rationing: WelfarePair | None = None

    def __getitem__(self, name) -> RunRecord:
        return self.runs[RunName(name)]

    def benchmark_mix(self) -> FixedMix:
        return self.runs[RunName.EOM_VOLL].solution.fixed_mix()


def _solve(name: str, scenarios, catalog, design, tolerance) -> EquilibriumSolution:
    try:
        return solve_equilibrium(assemble(scenarios, catalog, design), tolerance=tolerance)
    except (EquilibriumError, ValueError) as exc:
        raise SuiteError(name, exc) from exc


def _record(name: RunName, solution: EquilibriumSolution, benchmark: WelfareReport | None) -> RunRecord:
    unserved = acc.unserved_energy(solution, allow_uncapped=True)
    report = welfare(solution, unserved.eue)
    return RunRecord(name, solution, unserved, report.against(benchmark or report))


def fallback_generator_credit(generator: GeneratorSpec, scenarios: ScenarioSet) -> float:
    """Credit used when marginal accreditation is undefined.

    Dispatchable units keep their catalog credit; variable units are capped at
    their worst availability in each scenario's peak fixed-demand interval.
    """
    if generator.availability_key is None:
        return generator.capacity_credit
    at_peak = min(float(sc.availability[generator.availability_key][int(np.argmax(sc.fixed_demand))])
                  for sc in scenarios)
    return min(generator.capacity_credit, at_peak)


def calibrate(benchmark: EquilibriumSolution, capped: EquilibriumSolution, settings: SuiteSettings) -> Calibration:
    """Accredit the benchmark mix, fit storage credit curves and build the CM curve."""
    scenarios, catalog = benchmark.scenarios, benchmark.catalog
    mix = benchmark.fixed_mix()
    design = settings.design(RunMode.EOM_PC)
    notes: list[str] = []
    try:
        result = acc.accredit(mix, scenarios, catalog, design, epsilon=settings.epsilon,
                              durations=settings.durations, paradigm=settings.paradigm,
                              workers=settings.workers, tolerance=min(settings.tolerance, 1e-9))
        diagnostics = {}
        if settings.diagnostic_paradigms:
            for par in acc.Paradigm:
                if par is not settings.paradigm:
                    diagnostics[par.value] = acc.accredit(
                        mix, scenarios, catalog, design, epsilon=settings.epsilon, durations=settings.durations,
                        paradigm=par, workers=settings.workers, tolerance=min(settings.tolerance, 1e-9))
    except EquilibriumError as exc:
        raise SuiteError("accreditation", exc) from exc
    notes.extend(result.warnings)

    gen_credits: dict[str, float] = {}
    curves: dict[str, CreditCurve] = {}
    fits: dict[str, acc.CreditFit] = {}
    if result.credits_defined:
        gen_credits = {}
        for k, v in result.generator_credits().items():
            if k not in catalog.names:
                continue
            # solver noise can push a perfectly available unit a hair past the reference
            gen_credits[k] = min(max(v, 0.0), 1.0)
            if gen_credits[k] != v:
                notes.append(f"{k}: estimated credit {v:.8f} clipped to [0, 1]")
        for s in catalog.storages:
            pts = result.storage_points(s.name)
            if len(pts) < 2:
                notes.append(f"too few credit points for {s.name}; curve not fitted")
                continue
            segments = min(settings.segment_count, len(pts) - 1)
            if segments < settings.segment_count:
                notes.append(f"{s.name}: {len(pts)} credit points, fitted with {segments} segments")
            fits[s.name] = acc.fit_credit_curve(pts, segments)
            curves[s.name] = fits[s.name].curve
    else:
        notes.append(result.diagnostic)
        notes.append("credits undefined; catalog default credits used in the capacity market")
    for s in catalog.storages:
        if s.name not in curves:
            curves[s.name] = s.credit_curve or CreditCurve.constant(1.0)
    for g in catalog.generators:
        gen_credits.setdefault(g.name, fallback_generator_credit(g, scenarios))

    tol = installed_threshold(benchmark)
    estimated = dict(gen_credits)
    for s in catalog.storages:
        p = mix.storage_power.get(s.name, 0.0)
        if p > tol:
            estimated[s.name] = curves[s.name](s.duration(p, mix.storage_energy[s.name]))
    nc = net_cone(mix, capped, catalog, settings.reference, estimated)
    target = capacity_target(mix, catalog, gen_credits, curves, tol)
    if nc.status is NetConeStatus.OK and target > 0:
        curve = build_cm_demand_curve(target, nc.reference_net_cone)
    else:
        notes.append("no missing money for the reference technology; capacity demand priced at zero"
                     if nc.status is NetConeStatus.NO_MISSING_MONEY else "capacity target is zero")
        curve = zero_price_curve(target if target > 0 else scenarios.peak_fixed_demand())
    return Calibration(result, diagnostics, fits, gen_credits, curves, nc, target, curve, notes)


def run_suite(scenarios: ScenarioSet, catalog: TechnologyCatalog, settings: SuiteSettings | None = None) -> RunSuite:
    """Benchmark, capped re-dispatch, calibration, capacity market and capped EOM."""
    settings = settings or SuiteSettings()
    tol = settings.tolerance
    runs: dict[RunName, RunRecord] = {}

    voll = _solve(RunName.EOM_VOLL.value, scenarios, catalog, settings.design(RunMode.EOM_VOLL), tol)
    runs[RunName.EOM_VOLL] = _record(RunName.EOM_VOLL, voll, None)
    bench = runs[RunName.EOM_VOLL].welfare

    mix = voll.fixed_mix()
    capped = _solve(RunName.EOM_PC_OPT_MIX.value, scenarios, catalog,
                    settings.design(RunMode.DISPATCH_FIXED_MIX, fixed_capacities=mix, price_capped=True), tol)
    runs[RunName.EOM_PC_OPT_MIX] = _record(RunName.EOM_PC_OPT_MIX, capped, bench)

    try:
        calibration = calibrate(voll, capped, settings)
    except CalibrationError as exc:
        raise SuiteError("calibration", exc) from exc

    cm = _solve(RunName.E_PLUS_CM.value, scenarios, calibration.credited_catalog(catalog),
                settings.design(RunMode.E_PLUS_CM, capacity_demand_curve=calibration.curve), tol)
    runs[RunName.E_PLUS_CM] = _record(RunName.E_PLUS_CM, cm, bench)

    pc = _solve(RunName.EOM_PC.value, scenarios, catalog, settings.design(RunMode.EOM_PC), tol)
    runs[RunName.EOM_PC] = _record(RunName.EOM_PC, pc, bench)

    rationing = None
    if settings.redispatch:
        pair = redispatch_true_wtp(capped, tol)
        rationing = WelfarePair(pair.inefficient_distribution.against(bench),
                                pair.perfect_rationing.against(bench), pair.redispatched)
    return RunSuite(scenarios, catalog, settings, runs, calibration, rationing)


# ---------------------------------------------------------------------------
# credit sensitivity


@dataclass(frozen=True)
class SweepPoint:
    factor: float
    capacity_target: float
    capacity_price: float
    mu_price: float
    welfare: float
    welfare_loss_pct: float
    eue: float
    d_mu_price: float
    d_capacity_price: float
    d_welfare: float
    d_eue: float
    record: RunRecord


def _sweep_one(args) -> tuple[RunRecord, float]:
    suite, k = args
    cal = suite.calibration
    settings = suite.settings
    curves = {name: c.scaled(k) for name, c in cal.storage_curves.items()}
    tol = installed_threshold(suite.runs[RunName.EOM_VOLL].solution)
    target = capacity_target(suite.benchmark_mix(), suite.catalog, cal.generator_credits, curves, tol)
    if cal.net_cone.status is NetConeStatus.OK and target > 0:
        curve = build_cm_demand_curve(target, cal.net_cone.reference_net_cone)
    else:
        curve = zero_price_curve(target if target > 0 else suite.scenarios.peak_fixed_demand())
    catalog = suite.catalog.with_credits(cal.generator_credits, curves)
    sol = _solve(f"{RunName.E_PLUS_CM.value}[k={k}]", suite.scenarios, catalog,
                 settings.design(RunMode.E_PLUS_CM, capacity_demand_curve=curve), settings.tolerance)
    return _record(RunName.E_PLUS_CM, sol, suite.runs[RunName.EOM_VOLL].welfare), target


def credit_sensitivity_sweep(suite: RunSuite, factors=(0.8, 1.0, 1.2), workers: int | None = None) -> list[SweepPoint]:
    """Re-solve the capacity-market run with storage credit curves scaled by each factor.

    The capacity target is recomputed with the scaled curves while the
    reference net-CONE is held at its base value.
    """
    base = suite.runs[RunName.E_PLUS_CM]
    base_target = suite.calibration.capacity_target
    base_mu = price_and_cost_metrics(base.solution).mu_price
    workers = suite.settings.workers if workers is None else workers
    todo = [float(k) for k in factors if float(k) != 1.0]
    if workers > 1 and len(todo) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            solved = dict(zip(todo, pool.map(_sweep_one, [(suite, k) for k in todo])))
    else:
        solved = {k: _sweep_one((suite, k)) for k in todo}
    points = []
    for k in factors:
        k = float(k)
        rec, target = (base, base_target) if k == 1.0 else solved[k]
        mu = base_mu if k == 1.0 else price_and_cost_metrics(rec.solution).mu_price
        points.append(SweepPoint(
            factor=k, capacity_target=target, capacity_price=rec.solution.capacity_price, mu_price=mu,
            welfare=rec.welfare.welfare, welfare_loss_pct=rec.welfare.welfare_loss_pct, eue=rec.unserved.eue,
            d_mu_price=mu - base_mu, d_capacity_price=rec.solution.capacity_price - base.solution.capacity_price,
            d_welfare=rec.welfare.welfare - base.welfare.welfare, d_eue=rec.unserved.eue - base.unserved.eue,
            record=rec,
        ))
    return points


# ---------------------------------------------------------------------------
# export


def _f(v) -> str:
    return "" if v is None else repr(float(v))


def _writer(out: Path, name: str, header: list[str]):
    fh = (out / name).open("w", newline="", encoding="utf-8")
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(header)
    return fh, w


WELFARE_TABLE_HEADER = [
    "emission_intensity_g_per_kwh",
    "use_pct_EOM_VOLL", "use_pct_EOM_PC_OPT_MIX", "use_pct_E_PLUS_CM", "use_pct_EOM_PC",
    "welfare_loss_pct_EOM_PC_OPT_MIX_ineff_dist", "welfare_loss_pct_EOM_PC_OPT_MIX",
    "welfare_loss_pct_E_PLUS_CM", "welfare_loss_pct_EOM_PC",
]
PRICE_TABLE_HEADER = [
    "emission_intensity_g_per_kwh",
    "eom_mu_price", "eom_sigma_cv", "eom_beta_eb",
    "cm_mu_price", "cm_sigma_cv", "cm_kappa_ccc", "cm_beta_eb",
]
RUN_METRICS_HEADER = [
    "run", "welfare_usd_yr", "welfare_loss_pct", "consumer_benefit_usd_yr", "capital_cost_usd_yr",
    "variable_cost_usd_yr", "eue_mwh_yr", "eue_pct_demand", "mu_price", "mu_price_time_weighted",
    "sigma_cv", "sigma_cv_hourly", "kappa_ccc", "beta_eb", "energy_cost_usd_yr", "capacity_cost_usd_yr",
    "consumer_cost_usd_yr", "capacity_price", "carbon_price", "objective",
]


def write_suite(suite: RunSuite, out_dir, emission_intensity: float | None = None) -> dict[str, Path]:
    """Write every run's solution files plus the suite-level tables.

    Files: ``<RUN>_capacities.csv`` etc. per run, credits.csv,
    credit_curves.csv, calibration.csv, cm_curve.csv, run_metrics.csv,
    welfare_table.csv, price_table.csv, missing_money.csv,
    net_revenue_distribution.csv and storage_reconciliation.csv.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths: dict[str, Path] = {}
    for name, rec in suite.runs.items():
        for key, p in write_solution(rec.solution, out, tag=name.value).items():
            paths[f"{name.value}:{key}"] = p
    cal = suite.calibration
    paths["credits"] = acc.write_credits([cal.accreditation, *cal.diagnostics.values()], out)
    paths["credit_curves"] = acc.write_credit_curves(cal.fits, out)
    paths["calibration"] = write_calibration(cal.net_cone, out)
    paths["cm_curve"] = write_cm_curve(cal.curve, out)

    metrics = {name: price_and_cost_metrics(rec.solution) for name, rec in suite.runs.items()}
    fh, w = _writer(out, "run_metrics.csv", RUN_METRICS_HEADER)
    with fh:
        for name, rec in suite.runs.items():
            m, wr = metrics[name], rec.welfare
            w.writerow([name.value, _f(wr.welfare), _f(wr.welfare_loss_pct), _f(wr.consumer_benefit),
                        _f(wr.capital_cost), _f(wr.variable_cost), _f(wr.eue), _f(100.0 * wr.eue_share),
                        _f(m.mu_price), _f(m.mu_price_time_weighted), _f(m.sigma_cv), _f(m.sigma_cv_hourly),
                        _f(m.kappa_ccc), _f(m.beta_eb), _f(m.energy_cost), _f(m.capacity_cost),
                        _f(m.energy_cost + m.capacity_cost), _f(rec.solution.capacity_price),
                        _f(rec.solution.carbon_price), _f(rec.solution.objective)])
    paths["run_metrics"] = out / "run_metrics.csv"

    ei = _f(emission_intensity) if emission_intensity is not None else ""
    r = suite.runs
    ineff = suite.rationing.inefficient_distribution.welfare_loss_pct if suite.rationing else None
    perfect = suite.rationing.perfect_rationing.welfare_loss_pct if suite.rationing else None
    fh, w = _writer(out, "welfare_table.csv", WELFARE_TABLE_HEADER)
    with fh:
        w.writerow([ei, *(_f(100.0 * r[n].welfare.eue_share) for n in
                          (RunName.EOM_VOLL, RunName.EOM_PC_OPT_MIX, RunName.E_PLUS_CM, RunName.EOM_PC)),
                    _f(ineff), _f(perfect), _f(r[RunName.E_PLUS_CM].welfare.welfare_loss_pct),
                    _f(r[RunName.EOM_PC].welfare.welfare_loss_pct)])
    paths["welfare_table"] = out / "welfare_table.csv"

    eom, cm = metrics[RunName.EOM_VOLL], metrics[RunName.E_PLUS_CM]
    fh, w = _writer(out, "price_table.csv", PRICE_TABLE_HEADER)
    with fh:
        w.writerow([ei, _f(eom.mu_price), _f(eom.sigma_cv), _f(eom.beta_eb),
                    _f(cm.mu_price), _f(cm.sigma_cv), _f(cm.kappa_ccc), _f(cm.beta_eb)])
    paths["price_table"] = out / "price_table.csv"

    split = missing_money_split(r[RunName.EOM_PC_OPT_MIX].solution)
    fh, w = _writer(out, "missing_money.csv", [
        "technology", "below_cap_usd_yr", "at_cap_usd_yr", "capacity_usd_yr", "annualized_cost_usd_yr",
        "recovery_below_cap", "recovery_at_cap", "recovery_total"])
    with fh:
        for s in split:
            rc = s.recovery()
            w.writerow([s.technology, _f(s.below_cap), _f(s.at_cap), _f(s.capacity), _f(s.annualized_cost),
                        _f(rc["below_cap"]), _f(rc["at_cap"]), _f(rc["total"])])
    paths["missing_money"] = out / "missing_money.csv"

    fh, w = _writer(out, "net_revenue_distribution.csv",
                    ["run", "technology", "scenario_id", "net_revenue_usd_yr"])
    with fh:
        for name, m in metrics.items():
            names = [sc.name for sc in suite.scenarios]
            for tech in sorted(m.storage_net_revenue):
                for sc_name, v in zip(names, m.storage_net_revenue[tech]):
                    w.writerow([name.value, tech, sc_name, _f(v)])
    paths["net_revenue_distribution"] = out / "net_revenue_distribution.csv"

    fh, w = _writer(out, "storage_reconciliation.csv", [
        "run", "technology", "scenario_id", "attributed_usd_yr", "margin_usd_yr", "terminal_term_usd_yr",
        "book_iterations", "book_residual"])
    with fh:
        for name, rec in suite.runs.items():
            sol = rec.solution
            tol = installed_threshold(sol)
            for s in suite.catalog.storages:
                if sol.storage_power[s.name] <= tol:
                    continue
                books = storage_book_values(sol, s.name)
                for book, rc in zip(books, reconcile_storage(sol, s.name, books)):
                    w.writerow([name.value, s.name, rc.scenario, _f(rc.attributed), _f(rc.margin),
                                _f(rc.terminal_term), book.iterations, _f(book.residual)])
    paths["storage_reconciliation"] = out / "storage_reconciliation.csv"
    return paths


SWEEP_HEADER = ["factor", "capacity_target_mw", "capacity_price", "mu_price", "welfare_usd_yr",
                "welfare_loss_pct", "eue_mwh_yr", "d_mu_price", "d_capacity_price", "d_welfare_usd_yr",
                "d_eue_mwh_yr"]


def write_sweep(points: list[SweepPoint], out_dir) -> dict[str, Path]:
    """One tagged solution set per factor plus sweep_deltas.csv."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {}
    for pt in points:
        tag = f"k{pt.factor:g}"
        for key, p in write_solution(pt.record.solution, out, tag=tag).items():
            paths[f"{tag}:{key}"] = p
    fh, w = _writer(out, "sweep_deltas.csv", SWEEP_HEADER)
    with fh:
        for pt in points:
            w.writerow([_f(pt.factor), _f(pt.capacity_target), _f(pt.capacity_price), _f(pt.mu_price),
                        _f(pt.welfare), _f(pt.welfare_loss_pct), _f(pt.eue), _f(pt.d_mu_price),
                        _f(pt.d_capacity_price), _f(pt.d_welfare), _f(pt.d_eue)])
    paths["sweep_deltas"] = out / "sweep_deltas.csv"
    return paths
