"""Central-planner QP whose optimum is the market equilibrium.

Maximises expected consumer benefit (energy and, with a capacity market,
capacity) minus investment, fixed and variable costs. The duals of the
energy balance, capacity clearing and emission rows are the market prices;
energy prices are reported per MWh by dividing out the interval weight
``w * delta``.
"""

from __future__ import annotations

import csv
import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import scipy.sparse as sp

from . import qpsolver
from .domain import (
    FixedMix,
    GeneratorSpec,
    MarketDesign,
    RunMode,
    ScenarioSet,
    TechnologyCatalog,
    energy_demand,
    validate_inputs,
)

logger = logging.getLogger(__name__)


class EquilibriumError(RuntimeError):
    """Raised when the planner QP is not solved to optimality."""

    def __init__(self, status: qpsolver.Status, message: str, residual: float = math.nan):
        super().__init__(f"{status.value}: {message} (max KKT residual {residual:.3g})")
        self.status = status
        self.residual = residual


# Row kinds, each tied to one dual.
BALANCE = "balance"            # energy price
GEN_CAP = "gen_cap"            # generator capacity rent
CM_GEN = "cm_gen_qual"         # generator CM qualification
DIS_CAP = "dis_cap"
CH_CAP = "ch_cap"
SOC = "soc"                    # state-of-charge recursion
SOC_END = "soc_end"            # end-of-horizon SOC >= initial SOC
SOC_CAP = "soc_cap"
CM_STO = "cm_sto_qual"         # storage CM qualification, one row per credit line
CM_CLEAR = "cm_clearing"       # capacity price
EMISSION = "emission"          # carbon price


@dataclass
class PlannerProgram:
    """Variables, objective and labelled rows of the planner QP.

    Variable indices live in ``index``:

    * ``cap``: generator capacity per name; ``cap_power``/``cap_energy``/
      ``e_init`` per storage; ``cm`` contracted CM capacity per resource.
    * ``q``/``ch``/``dis``/``soc``: per technology, a list over scenarios of
      index arrays over intervals.
    * ``d_fix``/``d_flex``: lists over scenarios.
    * ``cm_fix`` scalar and ``cm_flex`` list for the capacity demand segments.

    ``rows`` maps a row kind to its row indices with the same nesting.
    """

    scenarios: ScenarioSet
    catalog: TechnologyCatalog
    design: MarketDesign
    n: int
    c: np.ndarray
    q_diag: np.ndarray
    upper: np.ndarray
    A: sp.csr_matrix
    senses: np.ndarray
    rhs: np.ndarray
    row_kind: np.ndarray
    index: dict
    rows: dict
    fixed: dict[int, float] = field(default_factory=dict)

    @property
    def m(self) -> int:
        return self.A.shape[0]

    def count_rows(self, kind: str) -> int:
        return int(np.sum(self.row_kind == kind))

    @property
    def row_labels(self) -> list[str]:
        return [str(k) for k in self.row_kind]

    def fix(self, indices, values) -> None:
        """Pin variables to given values; they are eliminated before solving."""
        idx = np.atleast_1d(np.asarray(indices, dtype=int))
        vals = np.broadcast_to(np.asarray(values, dtype=float), idx.shape)
        for i, v in zip(idx.tolist(), vals.tolist()):
            self.fixed[i] = max(v, 0.0)

    def objective(self, x: np.ndarray) -> float:
        return float(0.5 * np.sum(self.q_diag * x * x) + self.c @ x)

    def to_qp(self) -> tuple[qpsolver.ConvexQP, np.ndarray]:
        """Reduced QP over the free variables and the free-column map."""
        free = np.ones(self.n, dtype=bool)
        xf = np.zeros(self.n)
        if self.fixed:
            idx = np.fromiter(self.fixed.keys(), dtype=int)
            free[idx] = False
            xf[idx] = np.fromiter(self.fixed.values(), dtype=float)
        cols = np.flatnonzero(free)
        fixed_cols = np.flatnonzero(~free)
        A = self.A.tocsc()
        rhs = self.rhs - A[:, fixed_cols] @ xf[fixed_cols] if fixed_cols.size else self.rhs.copy()
        offset = float(self.c[fixed_cols] @ xf[fixed_cols]
                       + 0.5 * np.sum(self.q_diag[fixed_cols] * xf[fixed_cols] ** 2))
        qp = qpsolver.ConvexQP(
            c=self.c[cols],
            A=A[:, cols].tocsr(),
            senses=self.senses,
            rhs=rhs,
            Q=sp.diags(self.q_diag[cols]).tocsr(),
            upper=self.upper[cols],
            offset=offset,
        )
        return qp, cols

    def full_x(self, cols: np.ndarray, x: np.ndarray) -> np.ndarray:
        out = np.zeros(self.n)
        for i, v in self.fixed.items():
            out[i] = v
        out[cols] = x
        return out


class _Builder:
    def __init__(self):
        self.n = 0
        self.c: list[np.ndarray] = []
        self.qd: list[np.ndarray] = []
        self.ub: list[np.ndarray] = []
        self.ri: list[np.ndarray] = []
        self.ci: list[np.ndarray] = []
        self.vals: list[np.ndarray] = []
        self.senses: list[np.ndarray] = []
        self.rhs: list[np.ndarray] = []
        self.kinds: list[np.ndarray] = []
        self.m = 0

    def var(self, size=None, cost=0.0, quad=0.0, upper=math.inf):
        shape = () if size is None else (size,)
        k = 1 if size is None else size
        idx = np.arange(self.n, self.n + k)
        self.n += k
        self.c.append(np.broadcast_to(np.asarray(cost, dtype=float), (k,)).copy())
        self.qd.append(np.broadcast_to(np.asarray(quad, dtype=float), (k,)).copy())
        self.ub.append(np.broadcast_to(np.asarray(upper, dtype=float), (k,)).copy())
        return int(idx[0]) if shape == () else idx

    def rows(self, k: int, kind: str, sense: str, rhs=0.0) -> np.ndarray:
        idx = np.arange(self.m, self.m + k)
        self.m += k
        self.senses.append(np.full(k, sense, dtype=object))
        self.rhs.append(np.broadcast_to(np.asarray(rhs, dtype=float), (k,)).copy())
        self.kinds.append(np.full(k, kind, dtype=object))
        return idx

    def coef(self, rows, cols, vals) -> None:
        rows = np.atleast_1d(rows)
        cols = np.atleast_1d(cols)
        rows, cols, vals = np.broadcast_arrays(rows, cols, np.asarray(vals, dtype=float))
        self.ri.append(rows.ravel())
        self.ci.append(cols.ravel())
        self.vals.append(vals.ravel())

    def finish(self):
        cat = lambda xs, dt=float: np.concatenate(xs) if xs else np.zeros(0, dtype=dt)  # noqa: E731
        A = sp.csr_matrix((cat(self.vals), (cat(self.ri, int), cat(self.ci, int))), shape=(self.m, self.n))
        return (cat(self.c), cat(self.qd), cat(self.ub), A,
                cat(self.senses, object), cat(self.rhs), cat(self.kinds, object))


def assemble(scenarios: ScenarioSet, catalog: TechnologyCatalog, design: MarketDesign) -> PlannerProgram:
    report = validate_inputs(scenarios, catalog, design)
    if not report.ok:
        raise ValueError("invalid inputs: " + "; ".join(report.problems))
    cm = design.has_capacity_market
    b = _Builder()
    index: dict = {"cap": {}, "cap_power": {}, "cap_energy": {}, "e_init": {}, "cm": {},
                   "q": {}, "ch": {}, "dis": {}, "soc": {}, "d_fix": [], "d_flex": []}
    rows: dict = {BALANCE: [], GEN_CAP: {}, CM_GEN: {}, DIS_CAP: {}, CH_CAP: {}, SOC: {},
                  SOC_END: {}, SOC_CAP: {}, CM_STO: {}, CM_CLEAR: None, EMISSION: None}

    # first-stage variables
    for g in catalog.generators:
        index["cap"][g.name] = b.var(cost=-g.annual_cost)
    for s in catalog.storages:
        index["cap_power"][s.name] = b.var(cost=-s.power_cost)
        index["cap_energy"][s.name] = b.var(cost=-s.energy_cost)
        index["e_init"][s.name] = b.var()
    if cm:
        for g in catalog.generators:
            index["cm"][g.name] = b.var()
        for s in catalog.storages:
            index["cm"][s.name] = b.var()

    # second-stage variables
    for g in catalog.generators:
        index["q"][g.name] = []
    for s in catalog.storages:
        for key in ("ch", "dis", "soc"):
            index[key][s.name] = []
    for sc in scenarios:
        wd = sc.durations * sc.probability
        dem = energy_demand(sc, design)
        T = sc.n_intervals
        for g in catalog.generators:
            index["q"][g.name].append(b.var(T, cost=-wd * g.variable_cost))
        for s in catalog.storages:
            index["ch"][s.name].append(b.var(T))
            index["dis"][s.name].append(b.var(T, cost=-wd * s.variable_cost))
            index["soc"][s.name].append(b.var(T))
        flex = dem.flexible_width
        quad = np.where(flex > 0, -wd * dem.ceiling / np.where(flex > 0, flex, 1.0), 0.0)
        index["d_fix"].append(b.var(T, cost=wd * dem.ceiling, upper=dem.fixed_width))
        index["d_flex"].append(b.var(T, cost=wd * dem.ceiling, quad=quad, upper=flex))

    if cm:
        curve = design.capacity_demand_curve
        index["cm_fix"] = b.var(cost=curve.prices[0], upper=curve.fixed_width)
        index["cm_flex"] = []
        for n, width in enumerate(curve.flexible_widths):
            slope = curve.prices[n] - curve.prices[n + 1]
            quad = -slope / width if width > 0 else 0.0
            index["cm_flex"].append(b.var(cost=curve.prices[n], quad=quad, upper=width))

    # generator capacity rows: q - A c <= 0
    for g in catalog.generators:
        rows[GEN_CAP][g.name] = []
        for w_i, sc in enumerate(scenarios):
            T = sc.n_intervals
            r = b.rows(T, GEN_CAP, qpsolver.LE)
            b.coef(r, index["q"][g.name][w_i], 1.0)
            b.coef(r, index["cap"][g.name], -sc.availability_of(g.availability_key))
            rows[GEN_CAP][g.name].append(r)
        if cm:
            r = b.rows(1, CM_GEN, qpsolver.LE)
            b.coef(r, index["cm"][g.name], 1.0)
            b.coef(r, index["cap"][g.name], -g.capacity_credit)
            rows[CM_GEN][g.name] = r

    for s in catalog.storages:
        for kind in (DIS_CAP, CH_CAP, SOC, SOC_END, SOC_CAP):
            rows[kind][s.name] = []
        cp, ce, e0 = index["cap_power"][s.name], index["cap_energy"][s.name], index["e_init"][s.name]
        for w_i, sc in enumerate(scenarios):
            T = sc.n_intervals
            ch, dis, soc = (index[k][s.name][w_i] for k in ("ch", "dis", "soc"))
            r = b.rows(T, DIS_CAP, qpsolver.LE)
            b.coef(r, dis, 1.0)
            b.coef(r, cp, -1.0)
            rows[DIS_CAP][s.name].append(r)
            r = b.rows(T, CH_CAP, qpsolver.LE)
            b.coef(r, ch, 1.0)
            b.coef(r, cp, -1.0)
            rows[CH_CAP][s.name].append(r)
            # e_t - e_{t-1} - w (eta_ch ch - dis / eta_dis) = 0, e_0 = e_init
            r = b.rows(T, SOC, qpsolver.EQ)
            b.coef(r, soc, 1.0)
            b.coef(r[1:], soc[:-1], -1.0)
            b.coef(r[0], e0, -1.0)
            b.coef(r, ch, -sc.durations * s.charge_efficiency)
            b.coef(r, dis, sc.durations / s.discharge_efficiency)
            rows[SOC][s.name].append(r)
            r = b.rows(1, SOC_END, qpsolver.LE)
            b.coef(r, e0, 1.0)
            b.coef(r, soc[-1], -1.0)
            rows[SOC_END][s.name].append(r)
            r = b.rows(T, SOC_CAP, qpsolver.LE)
            b.coef(r, soc, 1.0)
            b.coef(r, ce, -1.0)
            rows[SOC_CAP][s.name].append(r)
        if cm:
            if s.credit_curve is None:
                raise ValueError(f"storage {s.name!r} needs a credit curve in a capacity market")
            lines = s.credit_curve.model_lines()
            r = b.rows(len(lines), CM_STO, qpsolver.LE)
            for row, (alpha, beta) in zip(r, lines):
                b.coef(row, index["cm"][s.name], 1.0)
                b.coef(row, cp, -alpha)
                b.coef(row, ce, -beta * s.discharge_efficiency)
            rows[CM_STO][s.name] = r

    # energy balance: d_fix + d_flex - supply = 0
    for w_i, sc in enumerate(scenarios):
        T = sc.n_intervals
        r = b.rows(T, BALANCE, qpsolver.EQ)
        b.coef(r, index["d_fix"][w_i], 1.0)
        b.coef(r, index["d_flex"][w_i], 1.0)
        for g in catalog.generators:
            b.coef(r, index["q"][g.name][w_i], -1.0)
        for s in catalog.storages:
            b.coef(r, index["dis"][s.name][w_i], -1.0)
            b.coef(r, index["ch"][s.name][w_i], 1.0)
        rows[BALANCE].append(r)

    if cm:
        # procured - contracted = 0, oriented like the energy balance so the
        # dual is the capacity price
        r = b.rows(1, CM_CLEAR, qpsolver.EQ)
        b.coef(r, index["cm_fix"], 1.0)
        for i in index["cm_flex"]:
            b.coef(r, i, 1.0)
        for name, i in index["cm"].items():
            b.coef(r, i, -1.0)
        rows[CM_CLEAR] = r

    r = b.rows(1, EMISSION, qpsolver.LE, design.emission_cap)
    for g in catalog.generators:
        if g.emission_factor > 0:
            for w_i, sc in enumerate(scenarios):
                b.coef(r, index["q"][g.name][w_i], sc.durations * sc.probability * g.emission_factor)
    rows[EMISSION] = r

    c, qd, ub, A, senses, rhs, kinds = b.finish()
    program = PlannerProgram(scenarios, catalog, design, b.n, c, qd, ub, A, senses, rhs, kinds, index, rows)

    if design.run_mode is RunMode.DISPATCH_FIXED_MIX:
        pin_capacities(program, design.fixed_capacities)
    return program


def pin_capacities(program: PlannerProgram, mix: FixedMix) -> None:
    """Fix every first-stage capacity; technologies absent from ``mix`` get 0."""
    idx = program.index
    for name, i in idx["cap"].items():
        program.fix(i, mix.generators.get(name, 0.0))
    for name, i in idx["cap_power"].items():
        program.fix(i, mix.storage_power.get(name, 0.0))
    for name, i in idx["cap_energy"].items():
        program.fix(i, mix.storage_energy.get(name, 0.0))


@dataclass
class EquilibriumSolution:
    """Primal decisions and de-weighted prices of a solved planner program.

    Per-interval series are lists over scenarios of arrays over intervals.
    """

    program: PlannerProgram
    x: np.ndarray
    duals: np.ndarray
    capacity: dict[str, float]
    storage_power: dict[str, float]
    storage_energy: dict[str, float]
    initial_soc: dict[str, float]
    cm_contracted: dict[str, float]
    cm_procured: float
    generation: dict[str, list[np.ndarray]]
    charge: dict[str, list[np.ndarray]]
    discharge: dict[str, list[np.ndarray]]
    soc: dict[str, list[np.ndarray]]
    served_fixed: list[np.ndarray]
    served_flexible: list[np.ndarray]
    energy_price: list[np.ndarray]
    capacity_price: float
    carbon_price: float
    objective: float
    kkt_residual: float
    iterations: int

    @property
    def scenarios(self) -> ScenarioSet:
        return self.program.scenarios

    @property
    def catalog(self) -> TechnologyCatalog:
        return self.program.catalog

    @property
    def design(self) -> MarketDesign:
        return self.program.design

    def served(self, w_i: int) -> np.ndarray:
        return self.served_fixed[w_i] + self.served_flexible[w_i]

    def fixed_mix(self) -> FixedMix:
        return FixedMix(dict(self.capacity), dict(self.storage_power), dict(self.storage_energy))

    def expected_emissions(self) -> float:
        total = 0.0
        for g in self.catalog.generators:
            for w_i, sc in enumerate(self.scenarios):
                total += g.emission_factor * sc.probability * float(sc.durations @ self.generation[g.name][w_i])
        return total


def solve_equilibrium(program: PlannerProgram, options: qpsolver.SolveOptions | None = None,
                      **kwargs) -> EquilibriumSolution:
    qp, cols = program.to_qp()
    result = qpsolver.solve(qp, options, **kwargs)
    residual = max(result.primal_residual, result.dual_residual, result.complementarity)
    if result.status is not qpsolver.Status.OPTIMAL:
        raise EquilibriumError(result.status, result.message or "solver did not reach optimality", residual)
    x = program.full_x(cols, result.x)
    y = result.duals
    idx = program.index
    rows = program.rows
    sc_list = list(program.scenarios)

    def take(d):
        return {k: [x[i] for i in v] for k, v in d.items()}

    prices = []
    for w_i, sc in enumerate(sc_list):
        prices.append(y[rows[BALANCE][w_i]] / (sc.durations * sc.probability))
    cm_price = float(y[rows[CM_CLEAR][0]]) if rows[CM_CLEAR] is not None else 0.0
    carbon = float(y[rows[EMISSION][0]]) if math.isfinite(program.design.emission_cap) else 0.0
    cm_procured = 0.0
    if program.design.has_capacity_market:
        cm_procured = float(x[idx["cm_fix"]] + sum(x[i] for i in idx["cm_flex"]))
    return EquilibriumSolution(
        program=program,
        x=x,
        duals=y,
        capacity={k: float(x[i]) for k, i in idx["cap"].items()},
        storage_power={k: float(x[i]) for k, i in idx["cap_power"].items()},
        storage_energy={k: float(x[i]) for k, i in idx["cap_energy"].items()},
        initial_soc={k: float(x[i]) for k, i in idx["e_init"].items()},
        cm_contracted={k: float(x[i]) for k, i in idx["cm"].items()},
        cm_procured=cm_procured,
        generation=take(idx["q"]),
        charge=take(idx["ch"]),
        discharge=take(idx["dis"]),
        soc=take(idx["soc"]),
        served_fixed=[x[i] for i in idx["d_fix"]],
        served_flexible=[x[i] for i in idx["d_flex"]],
        energy_price=prices,
        capacity_price=cm_price,
        carbon_price=carbon,
        objective=result.objective,
        kkt_residual=residual,
        iterations=result.iterations,
    )


def energy_margin(solution: EquilibriumSolution, name: str) -> np.ndarray:
    """Per-scenario energy-market margin (revenue less variable and carbon costs), $/yr.

    Not probability weighted.
    """
    tech = solution.catalog.get(name)
    out = []
    for w_i, sc in enumerate(solution.scenarios):
        lam = solution.energy_price[w_i]
        if isinstance(tech, GeneratorSpec):
            q = solution.generation[name][w_i]
            unit = lam - tech.variable_cost - solution.carbon_price * tech.emission_factor
            out.append(float(np.sum(sc.durations * unit * q)))
        else:
            dis = solution.discharge[name][w_i]
            ch = solution.charge[name][w_i]
            out.append(float(np.sum(sc.durations * (lam * (dis - ch) - tech.variable_cost * dis))))
    return np.array(out)


def annualized_cost(solution: EquilibriumSolution, name: str) -> float:
    tech = solution.catalog.get(name)
    if isinstance(tech, GeneratorSpec):
        return solution.capacity[name] * tech.annual_cost
    return solution.storage_power[name] * tech.power_cost + solution.storage_energy[name] * tech.energy_cost


def agent_profit(solution: EquilibriumSolution, name: str) -> float:
    """Expected profit of one technology's agent at the equilibrium point."""
    if name not in solution.catalog.names:
        raise KeyError(f"unknown technology {name!r}")
    probs = np.array([sc.probability for sc in solution.scenarios])
    energy = float(probs @ energy_margin(solution, name))
    cm = solution.cm_contracted.get(name, 0.0) * solution.capacity_price
    return energy + cm - annualized_cost(solution, name)


def marginal_profit_per_mw(solution: EquilibriumSolution, name: str) -> float:
    """Profit of one extra MW of a generator at fixed prices (<= 0 if not built)."""
    g = solution.catalog.generator(name)
    total = 0.0
    for w_i, sc in enumerate(solution.scenarios):
        unit = solution.energy_price[w_i] - g.variable_cost - solution.carbon_price * g.emission_factor
        avail = sc.availability_of(g.availability_key)
        total += sc.probability * float(np.sum(sc.durations * avail * np.maximum(unit, 0.0)))
    return total + g.capacity_credit * solution.capacity_price - g.annual_cost


def write_solution(solution: EquilibriumSolution, out_dir: str | Path, tag: str = "") -> dict[str, Path]:
    """Emit capacities.csv, prices.csv, dispatch.csv, duals.csv and run_summary.json."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    prefix = f"{tag}_" if tag else ""
    paths = {}
    cat = solution.catalog

    p = out / f"{prefix}capacities.csv"
    with p.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["technology", "kind", "power_mw", "energy_mwh", "duration_h", "cm_contracted_mw", "profit_usd_yr"])
        for g in cat.generators:
            w.writerow([g.name, "generator", _f(solution.capacity[g.name]), "", "",
                        _f(solution.cm_contracted.get(g.name, 0.0)), _f(agent_profit(solution, g.name))])
        for s in cat.storages:
            pw, en = solution.storage_power[s.name], solution.storage_energy[s.name]
            w.writerow([s.name, "storage", _f(pw), _f(en), _f(s.duration(pw, en)),
                        _f(solution.cm_contracted.get(s.name, 0.0)), _f(agent_profit(solution, s.name))])
    paths["capacities"] = p

    p = out / f"{prefix}prices.csv"
    with p.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["scenario_id", "interval_id", "weight_hours", "energy_price_usd_mwh"])
        for w_i, sc in enumerate(solution.scenarios):
            for t in range(sc.n_intervals):
                w.writerow([sc.name, t, _f(sc.durations[t]), _f(solution.energy_price[w_i][t])])
    paths["prices"] = p

    p = out / f"{prefix}dispatch.csv"
    with p.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["scenario_id", "interval_id", "technology", "variable", "value_mw"])
        for w_i, sc in enumerate(solution.scenarios):
            for t in range(sc.n_intervals):
                for g in cat.generators:
                    w.writerow([sc.name, t, g.name, "generation", _f(solution.generation[g.name][w_i][t])])
                for s in cat.storages:
                    w.writerow([sc.name, t, s.name, "charge", _f(solution.charge[s.name][w_i][t])])
                    w.writerow([sc.name, t, s.name, "discharge", _f(solution.discharge[s.name][w_i][t])])
                    w.writerow([sc.name, t, s.name, "soc_mwh", _f(solution.soc[s.name][w_i][t])])
                w.writerow([sc.name, t, "demand", "served_fixed", _f(solution.served_fixed[w_i][t])])
                w.writerow([sc.name, t, "demand", "served_flexible", _f(solution.served_flexible[w_i][t])])
    paths["dispatch"] = p

    p = out / f"{prefix}duals.csv"
    with p.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["dual", "value", "unit"])
        w.writerow(["capacity_price", _f(solution.capacity_price), "usd_per_mw_yr"])
        w.writerow(["carbon_price", _f(solution.carbon_price), "usd_per_tco2"])
    paths["duals"] = p

    p = out / f"{prefix}run_summary.json"
    summary = {
        "run_mode": solution.design.run_mode.value,
        "demand_mode": solution.design.demand_mode.value,
        "objective": solution.objective,
        "max_kkt_residual": solution.kkt_residual,
        "iterations": solution.iterations,
        "capacity_price": solution.capacity_price,
        "carbon_price": solution.carbon_price,
        "expected_emissions_t": solution.expected_emissions(),
    }
    p.write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    paths["summary"] = p
    return paths


def _f(v: float) -> str:
    return repr(float(v))
