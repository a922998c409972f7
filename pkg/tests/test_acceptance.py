"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with ``pytest -s tests/test_acceptance.py`` to see the verdict lines.
The desk case is two synthetic weather years of 336 intervals with an
emission intensity of 10 g/kWh and a price cap of 0.37 x VOLL.
"""

from __future__ import annotations

import itertools
import math

import numpy as np
import pytest
from conftest import desk_settings, simple_generator, single_scenario
from scipy.optimize import linprog

from ldescm import accreditation as acc
from ldescm import qpsolver
from ldescm.analysis import (
    RunName,
    credit_sensitivity_sweep,
    missing_money_split,
    reconcile_storage,
    run_suite,
    storage_book_values,
)
from ldescm.calibration import NetConeStatus, build_cm_demand_curve, installed_threshold
from ldescm.domain import FixedMix, MarketDesign, RunMode, TechnologyCatalog
from ldescm.planner import agent_profit, annualized_cost, assemble, solve_equilibrium

FREE_INVESTMENT_RUNS = (RunName.EOM_VOLL, RunName.E_PLUS_CM, RunName.EOM_PC)


def verdict(number: int, ok: bool, detail: str) -> None:
    print(f"\ncriterion {number:2d}: {'PASS' if ok else 'FAIL'} - {detail}")
    assert ok, detail


@pytest.fixture(scope="module")
def sweep(desk_suite):
    return credit_sensitivity_sweep(desk_suite, (0.8, 1.0, 1.2))


@pytest.fixture(scope="module")
def uncapped_suite(desk_scenarios, catalog):
    settings = desk_settings(desk_scenarios)
    return run_suite(desk_scenarios, catalog, desk_settings(desk_scenarios, price_cap=settings.voll))


def _installed(solution, name) -> float:
    return solution.capacity.get(name, solution.storage_power.get(name, 0.0))


def test_criterion_01_zero_profit_equilibrium(desk_suite):
    worst, where = 0.0, ""
    checked = 0
    for run in FREE_INVESTMENT_RUNS:
        sol = desk_suite[run].solution
        tol = installed_threshold(sol)
        for name in sol.catalog.names:
            if _installed(sol, name) <= tol:
                continue
            checked += 1
            rel = abs(agent_profit(sol, name)) / annualized_cost(sol, name)
            if rel > worst:
                worst, where = rel, f"{run.value}/{name}"
    verdict(1, checked > 0 and worst <= 1e-4,
            f"{checked} installed technologies; worst |profit|/cost = {worst:.2e} ({where}), limit 1e-4")


def test_criterion_02_single_interval_oracle():
    voll, vc, fixed_cost, d_fix, d_flex = 1000.0, 10.0, 100.0, 10.0, 1.0
    # analytic KKT: the price covers variable cost plus the capacity rent over one hour,
    # and flexible demand clears where its WTP equals that price
    price = vc + fixed_cost / 1.0
    capacity = d_fix + d_flex * (1.0 - price / voll)
    scen = single_scenario([d_fix], d_flex)
    cat = TechnologyCatalog((simple_generator("gen", vc, fixed_cost),))
    sol = solve_equilibrium(assemble(scen, cat, MarketDesign(RunMode.EOM_VOLL, voll=voll, price_cap=voll)))
    dc = abs(sol.capacity["gen"] - capacity)
    dp = abs(sol.energy_price[0][0] - price)
    verdict(2, dc <= 1e-6 and dp <= 1e-6,
            f"capacity {sol.capacity['gen']:.9f} vs {capacity} (err {dc:.1e}); "
            f"price {sol.energy_price[0][0]:.9f} vs {price} (err {dp:.1e})")


def test_criterion_03_welfare_ordering(desk_suite):
    settings = desk_suite.settings
    assert settings.price_cap / settings.voll == pytest.approx(0.37, abs=0.005)
    sw = {run: desk_suite[run].welfare.welfare for run in (RunName.EOM_VOLL, RunName.E_PLUS_CM, RunName.EOM_PC)}
    # the benchmark and capacity-market optima can coincide; allow solver noise in welfare
    noise = 1e-8 * abs(sw[RunName.EOM_VOLL])
    loss_cm = sw[RunName.EOM_VOLL] - sw[RunName.E_PLUS_CM]
    loss_pc = sw[RunName.EOM_VOLL] - sw[RunName.EOM_PC]
    ordered = loss_cm >= -noise and sw[RunName.E_PLUS_CM] >= sw[RunName.EOM_PC] - noise
    ratio_ok = loss_pc > noise and loss_cm <= 0.5 * loss_pc + noise
    verdict(3, ordered and ratio_ok,
            f"SW loss E_PLUS_CM = {loss_cm:.4g} $/yr, EOM_PC = {loss_pc:.4g} $/yr "
            f"(ratio {loss_cm / loss_pc if loss_pc else math.nan:.3g}, limit 0.5; noise {noise:.3g})")


def test_criterion_04_missing_money(desk_suite):
    splits = missing_money_split(desk_suite[RunName.EOM_PC_OPT_MIX].solution)
    recovery = {s.technology: s.recovery()["total"] for s in splits}
    short = {k: v for k, v in recovery.items() if v < 0.95}
    verdict(4, bool(short), "cost recovery under the cap: "
            + ", ".join(f"{k} {100 * v:.1f}%" for k, v in recovery.items()))


def test_criterion_05_reference_credit(desk_suite, desk_scenarios, catalog):
    result = desk_suite.calibration.accreditation
    builtin = [e for e in result.estimates if e.resource == acc.reference_generator().name]
    # an identical perfect generator accredited like any other resource
    perfect = simple_generator("perfect", 0.0, 0.0)
    own = acc.accredit(desk_suite.benchmark_mix(), desk_scenarios, catalog.add(perfect),
                       desk_suite.settings.design(RunMode.EOM_PC), resources=["perfect"], durations=[])
    credit = own.generator_credits()["perfect"]
    ok = len(builtin) == 1 and abs(builtin[0].credit - 1.0) <= 1e-9 and abs(credit - 1.0) <= 1e-9
    verdict(5, ok, f"reference credit {builtin[0].credit if builtin else math.nan!r}; "
                   f"perfect generator as a resource {credit!r}")


def test_criterion_06_credit_curve_quality(desk_suite):
    fits = desk_suite.calibration.fits
    lines = []
    ok = bool(fits)
    for name, fit in fits.items():
        problems = fit.curve.violations()
        segs = fit.curve.segments
        monotone = all(s.slope >= 0 for s in segs)
        concave = all(b.slope <= a.slope + 1e-12 for a, b in zip(segs, segs[1:]))
        ok &= fit.r_squared > 0.99 and not problems and monotone and concave and len(segs) == 4
        lines.append(f"{name}: R2 {fit.r_squared:.6f}, {len(segs)} segments, "
                     f"{'shape ok' if not problems and monotone and concave else problems}")
    verdict(6, ok, "; ".join(lines) or "no storage credit points")


def test_criterion_07_paradigm_ordering(desk_suite, desk_scenarios, catalog):
    # less firm generation plus a short battery fleet whose dispatch matters for adequacy
    mix = desk_suite.benchmark_mix().with_addition("ccgt_ccs", -8.0).with_addition("battery", 5.0, 100.0)
    design = desk_suite.settings.design(RunMode.EOM_PC)
    reduction = {}
    for paradigm in acc.Paradigm:
        res = acc.accredit(mix, desk_scenarios, catalog, design, paradigm=paradigm,
                           resources=["ccgt_ccs"], durations=[])
        est = next(e for e in res.estimates if e.resource == "ccgt_ccs")
        reduction[paradigm] = est.eue_reduction
    u, c, cd = (reduction[p] for p in (acc.Paradigm.UNCONSTRAINED, acc.Paradigm.CHARGING_FIXED,
                                       acc.Paradigm.CHARGING_AND_DISCHARGING_FIXED))
    noise = 1e-6 * max(abs(u), 1.0)
    verdict(7, u >= c - noise and c >= cd - noise and u > 0,
            f"EUE reduction UNCONSTRAINED {u:.9f} >= CHARGING_FIXED {c:.9f} "
            f">= CHARGING_AND_DISCHARGING_FIXED {cd:.9f} MWh/yr")


def test_criterion_08_price_cap_equals_voll(uncapped_suite):
    objectives = {r: uncapped_suite[r].solution.objective for r in RunName}
    base = objectives[RunName.EOM_VOLL]
    spread = max(abs(v - base) for v in objectives.values()) / abs(base)
    eues = [uncapped_suite[r].unserved.eue for r in RunName]
    nc = uncapped_suite.calibration.net_cone
    cm_price = uncapped_suite[RunName.E_PLUS_CM].solution.capacity_price
    no_nc = nc.status is NetConeStatus.NO_MISSING_MONEY
    # an interior-point dual of a zero-priced curve is zero up to solver noise
    ok = spread <= 1e-6 and max(eues) - min(eues) <= 1e-9 and (not no_nc or abs(cm_price) <= 1e-6)
    verdict(8, ok, f"objective spread {spread:.1e} rel; EUE {min(eues):.3g}..{max(eues):.3g}; "
                   f"reference net-CONE {nc.reference_net_cone:.4g} ({nc.status.value}); capacity price {cm_price:.2e}")


def test_criterion_09_book_value_reconciliation(desk_suite):
    lines, ok, checked = [], True, 0
    for run in RunName:
        sol = desk_suite[run].solution
        tol = installed_threshold(sol)
        for s in sol.catalog.storages:
            if sol.storage_power[s.name] <= tol:
                continue
            books = storage_book_values(sol, s.name)
            for book, rec in zip(books, reconcile_storage(sol, s.name, books)):
                checked += 1
                cyclic = abs(book.phi_0 - book.phi[-1]) / max(1.0, abs(book.phi[-1]))
                gap = abs(rec.attributed - rec.margin) / max(1.0, abs(rec.margin))
                ok &= book.converged and book.iterations <= 100 and cyclic <= 1e-6 and gap <= 1e-6
                lines.append(f"{run.value}/{s.name}/{rec.scenario}: {book.iterations} sweeps, "
                             f"cyclic {cyclic:.1e}, gap {gap:.1e}")
    verdict(9, ok and checked > 0, "; ".join(lines))


def test_criterion_10_sensitivity_directions(sweep):
    by = {p.factor: p for p in sweep}
    lo, base, hi = by[0.8], by[1.0], by[1.2]
    signs = {
        "EUE up at 0.8": lo.eue > base.eue,
        "capacity price down at 0.8": lo.capacity_price < base.capacity_price,
        "EUE down at 1.2": hi.eue < base.eue,
        "capacity price up at 1.2": hi.capacity_price > base.capacity_price,
    }
    detail = (f"dEUE(0.8) {lo.d_eue:+.4g}, dCM(0.8) {lo.d_capacity_price:+.4g}, "
              f"dEUE(1.2) {hi.d_eue:+.4g}, dCM(1.2) {hi.d_capacity_price:+.4g}; "
              f"welfare loss 0.8 {lo.welfare_loss_pct:.4f}% vs 1.2 {hi.welfare_loss_pct:.4f}% (reported); "
              "wrong: " + (", ".join(k for k, v in signs.items() if not v) or "none"))
    verdict(10, all(signs.values()), detail)


def test_criterion_11_eue_formula():
    voll, pc = 20300.0, 7549.0
    expected = 100.0 + 2.0 * (voll - pc) / voll - 95.0
    value = float(acc.shortfall_threshold(100.0, 2.0, voll, pc) - 95.0)
    # the same point through a capped dispatch with 95 MW of firm capacity
    scen = single_scenario([100.0], 2.0)
    cat = TechnologyCatalog((simple_generator("gen", 10.0, 100.0),))
    design = MarketDesign(RunMode.DISPATCH_FIXED_MIX, voll=voll, price_cap=pc,
                          fixed_capacities=FixedMix({"gen": 95.0}), price_capped=True)
    sol = solve_equilibrium(assemble(scen, cat, design))
    dispatched = acc.unserved_energy(sol).shortfall[0][0]
    ok = abs(value - expected) <= 1e-9 and round(value, 5) == 6.25626 and abs(dispatched - expected) <= 1e-6
    verdict(11, ok, f"hand evaluation {value:.9f} MW, dispatched {dispatched:.9f} MW, expected {expected:.9f}")


# --- criterion 12: random convex QPs against independent oracles -----------------


def _random_instance(rng: np.random.Generator, n: int, quadratic: bool):
    m_le = int(rng.integers(1, 4))
    m_eq = int(rng.integers(0, 2))
    x0 = rng.uniform(0.1, 1.0, n)
    G = rng.normal(size=(m_le, n))
    h = G @ x0 + rng.uniform(0.1, 1.0, m_le)
    E = rng.normal(size=(m_eq, n))
    e = E @ x0
    upper = np.where(rng.random(n) < 0.7, rng.uniform(1.5, 4.0, n), np.inf)
    # a budget row keeps every instance bounded
    G = np.vstack([G, np.ones(n)])
    h = np.append(h, x0.sum() + 5.0)
    A = np.vstack([G, E])
    senses = np.array([qpsolver.LE] * len(h) + [qpsolver.EQ] * m_eq, dtype=object)
    rhs = np.concatenate([h, e])
    c = rng.normal(size=n)
    Q = np.diag(-rng.uniform(0.2, 2.0, n)) if quadratic else None
    return qpsolver.ConvexQP(c=c, A=A, senses=senses, rhs=rhs, Q=Q, upper=upper)


def _simplex_oracle(qp: qpsolver.ConvexQP) -> float:
    le = qp.senses == qpsolver.LE
    A = qp.A.toarray()
    res = linprog(-qp.c, A_ub=A[le], b_ub=qp.rhs[le], A_eq=A[~le] if (~le).any() else None,
                  b_eq=qp.rhs[~le] if (~le).any() else None,
                  bounds=[(0, None if math.isinf(u) else u) for u in qp.upper], method="highs")
    assert res.status == 0
    return -res.fun


def _brute_force_oracle(qp: qpsolver.ConvexQP) -> float:
    """Enumerate active sets of a strictly concave QP and keep the best KKT point."""
    n = qp.n
    A = qp.A.toarray()
    le = qp.senses == qpsolver.LE
    rows = [(A[i], qp.rhs[i]) for i in np.flatnonzero(le)]
    rows += [(-np.eye(n)[j], 0.0) for j in range(n)]
    rows += [(np.eye(n)[j], qp.upper[j]) for j in range(n) if math.isfinite(qp.upper[j])]
    C_ineq = np.array([r[0] for r in rows])
    d_ineq = np.array([r[1] for r in rows])
    C_eq, d_eq = A[~le], qp.rhs[~le]
    Q = qp.Q.toarray()
    best = -math.inf
    for k in range(0, n - len(d_eq) + 1):
        for active in itertools.combinations(range(len(rows)), k):
            C = np.vstack([C_eq, C_ineq[list(active)]]) if k or len(d_eq) else np.zeros((0, n))
            d = np.concatenate([d_eq, d_ineq[list(active)]])
            mm = C.shape[0]
            K = np.block([[-Q, C.T], [C, np.zeros((mm, mm))]])
            rhs = np.concatenate([qp.c, d])
            sol, *_ = np.linalg.lstsq(K, rhs, rcond=None)
            if np.abs(K @ sol - rhs).max() > 1e-9:
                continue
            x, mult = sol[:n], sol[n:]
            if np.any(mult[len(d_eq):] < -1e-9):
                continue
            if np.any(C_ineq @ x > d_ineq + 1e-9) or (len(d_eq) and np.abs(C_eq @ x - d_eq).max() > 1e-9):
                continue
            best = max(best, qp.objective(x))
    return best


def test_criterion_12_solver_conformance():
    rng = np.random.default_rng(20240611)
    worst_obj, worst_kkt, failures = 0.0, 0.0, []
    for k in range(50):
        quadratic = k % 2 == 1
        n = int(rng.integers(2, 6)) if quadratic else int(rng.integers(2, 21))
        qp = _random_instance(rng, n, quadratic)
        result = qpsolver.solve(qp)
        if not result.optimal:
            failures.append(f"#{k} {result.status.value}")
            continue
        oracle = _brute_force_oracle(qp) if quadratic else _simplex_oracle(qp)
        err = abs(result.objective - oracle) / max(1.0, abs(oracle))
        report = qpsolver.verify_kkt(qp, result)
        worst_obj = max(worst_obj, err)
        worst_kkt = max(worst_kkt, report.max_residual())
        if err > 1e-7:
            failures.append(f"#{k} objective off by {err:.1e}")
        if not report.passes(1e-8):
            failures.append(f"#{k} KKT residual {report.max_residual():.1e}")
    verdict(12, not failures, f"50 instances; worst objective error {worst_obj:.1e}, "
                              f"worst verified KKT residual {worst_kkt:.1e}; failures: {failures or 'none'}")


def test_criterion_13_cm_curve_construction(desk_suite, sweep):
    curve = build_cm_demand_curve(100.0, 60.0)
    points = curve.breakpoints()
    exact = points == [(96.5, 90.0), (100.0, 60.0), (103.5, 0.0)]
    nc = desk_suite.calibration.net_cone.reference_net_cone
    prices = [desk_suite[RunName.E_PLUS_CM].solution.capacity_price] + [p.capacity_price for p in sweep]
    within = all(0.0 - 1e-6 <= p <= 1.5 * nc + 1e-6 for p in prices)
    verdict(13, exact and within, f"breakpoints {points}; capacity prices "
                                  + ", ".join(f"{p:.2f}" for p in prices) + f" <= 1.5 x {nc:.2f}")
