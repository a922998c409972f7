import csv

import numpy as np
import pytest
from conftest import single_scenario, simple_generator, toy_case

from ldescm import analysis as an
from ldescm.analysis import BookValueSeries, RunName, book_value, storage_net_revenue
from ldescm.domain import MarketDesign, RunMode, TechnologyCatalog
from ldescm.planner import assemble, energy_margin, solve_equilibrium

# --- book value ---------------------------------------------------------------------------


def test_book_value_of_first_charge():
    book = book_value([10.0], [0.0], [5.0], [20.0], [1.0], e_init=0.0, discharge_efficiency=1.0)
    assert book.converged
    assert book.phi[0] == pytest.approx(40.0)


def test_pure_discharge_keeps_book_value():
    # charge 10 MW at 20 with 50% charging losses, then withdraw 2 MWh of stored energy
    book = book_value([10.0, 0.0], [0.0, 1.6], [5.0, 3.0], [20.0, 500.0], [1.0, 1.0],
                      e_init=0.0, discharge_efficiency=0.8)
    assert book.phi[1] == pytest.approx(book.phi[0])
    assert book.phi[0] == pytest.approx(40.0)


def test_cyclic_schedule_at_one_price_has_flat_book_value():
    eta_ch, price = 0.6, 30.0
    charge = [10.0, 10.0, 0.0, 0.0]
    discharge = [0.0, 0.0, 6.0, 6.0]
    soc = [9.0, 15.0, 9.0, 3.0]
    book = book_value(charge, discharge, soc, [price] * 4, [1.0] * 4, e_init=3.0, discharge_efficiency=1.0)
    assert book.converged
    np.testing.assert_allclose(book.phi, price / eta_ch, rtol=1e-9)
    assert book.phi_0 == pytest.approx(price / eta_ch, rel=1e-9)


def test_empty_storage_carries_value_forward():
    book = book_value([10.0, 0.0, 0.0], [0.0, 5.0, 0.0], [5.0, 0.0, 0.0], [20.0, 80.0, 90.0], [1.0] * 3,
                      e_init=0.0, discharge_efficiency=1.0)
    assert book.phi.tolist() == pytest.approx([40.0, 40.0, 40.0])


def _book(phi):
    return BookValueSeries(np.array([phi]), phi, 1, 0.0, True)


def test_storage_net_revenue_hand_values():
    assert storage_net_revenue(_book(40.0), [5.0], [100.0], 0.8)[0] == pytest.approx(250.0)
    assert storage_net_revenue(_book(40.0), [5.0], [50.0], 0.8)[0] == pytest.approx(0.0)
    assert storage_net_revenue(_book(40.0), [0.0], [100.0], 0.8)[0] == 0.0


def test_unconverged_book_value_is_rejected():
    book = BookValueSeries(np.array([40.0]), 0.0, 100, 40.0, False)
    with pytest.raises(ValueError):
        storage_net_revenue(book, [5.0], [100.0], 0.8)


def test_book_value_iteration_limit_reports_unconverged():
    book = book_value([10.0, 0.0], [0.0, 1.0], [5.0, 4.0], [20.0, 50.0], [1.0, 1.0], e_init=4.0,
                      discharge_efficiency=1.0, max_iterations=1)
    assert not book.converged and book.iterations == 1


# --- toy-system metrics --------------------------------------------------------------------

VOLL, PC = 1000.0, 100.0


def _toy(mode, **kwargs):
    scen, cat = toy_case()
    return solve_equilibrium(assemble(scen, cat, MarketDesign(mode, voll=VOLL, price_cap=PC, **kwargs)))


def test_missing_money_split_partitions_energy_revenue():
    bench = _toy(RunMode.EOM_VOLL)
    capped = _toy(RunMode.DISPATCH_FIXED_MIX, fixed_capacities=bench.fixed_mix(), price_capped=True)
    splits = an.missing_money_split(capped)
    assert splits
    probs = np.array([sc.probability for sc in capped.scenarios])
    mask = [an.at_cap_mask(p, PC) for p in capped.energy_price]
    assert any(m.any() for m in mask)
    for split in splits:
        assert split.energy == pytest.approx(split.below_cap + split.at_cap)
        assert split.capacity == 0.0
        if split.technology in capped.capacity:
            assert split.energy == pytest.approx(float(probs @ energy_margin(capped, split.technology)), rel=1e-9)
            if all(not np.any(capped.generation[split.technology][w][m]) for w, m in enumerate(mask)):
                assert split.at_cap == 0.0
    for rec in an.reconcile_storage(capped, "store"):
        assert rec.attributed == pytest.approx(rec.margin + rec.terminal_term, rel=1e-6, abs=1e-6)


def test_price_metrics_basics():
    sol = _toy(RunMode.EOM_PC)
    m = an.price_and_cost_metrics(sol)
    assert m.kappa_ccc == 0.0
    assert m.beta_eb == 0.0
    assert 0.0 < m.mu_price <= PC * (1 + 1e-6)


def test_constant_prices_have_no_variability():
    # two identical scenarios with enough cheap firm capacity for the price to stay at variable cost
    scen = single_scenario([10.0, 12.0], 0.0, name="a")
    cat = TechnologyCatalog((simple_generator("gen", 10.0, 0.0),))
    sol = solve_equilibrium(assemble(scen, cat, MarketDesign(RunMode.EOM_VOLL, voll=VOLL, price_cap=PC)))
    m = an.price_and_cost_metrics(sol)
    assert m.mu_price == pytest.approx(10.0, rel=1e-6)
    assert m.sigma_cv == pytest.approx(0.0, abs=1e-9)
    assert m.sigma_cv_hourly == pytest.approx(0.0, abs=1e-6)


def test_welfare_reevaluation_matches_uncapped_objective():
    sol = _toy(RunMode.EOM_VOLL)
    report = an.welfare(sol)
    assert report.welfare == pytest.approx(sol.objective, rel=1e-6)
    assert report.against(report).welfare_loss_pct == pytest.approx(0.0, abs=1e-12)


def test_redispatch_at_voll_changes_nothing():
    bench = _toy(RunMode.EOM_VOLL)
    scen, cat = toy_case()
    design = MarketDesign(RunMode.DISPATCH_FIXED_MIX, voll=VOLL, price_cap=VOLL,
                          fixed_capacities=bench.fixed_mix(), price_capped=True)
    sol = solve_equilibrium(assemble(scen, cat, design))
    pair = an.redispatch_true_wtp(sol)
    assert pair.perfect_rationing.welfare == pytest.approx(pair.inefficient_distribution.welfare, rel=1e-7)


def test_redispatch_cannot_lower_welfare():
    bench = _toy(RunMode.EOM_VOLL)
    capped = _toy(RunMode.DISPATCH_FIXED_MIX, fixed_capacities=bench.fixed_mix(), price_capped=True)
    pair = an.redispatch_true_wtp(capped)
    tol = 1e-7 * abs(pair.inefficient_distribution.welfare)
    assert pair.perfect_rationing.welfare >= pair.inefficient_distribution.welfare - tol
    assert an.proportional_consumer_benefit(bench) == an.true_consumer_benefit(bench)


# --- desk suite -----------------------------------------------------------------------------


def test_optimal_mix_rerun_keeps_benchmark_capacities(desk_suite):
    voll = desk_suite[RunName.EOM_VOLL].solution
    capped = desk_suite[RunName.EOM_PC_OPT_MIX].solution
    assert capped.capacity == voll.capacity
    assert capped.storage_power == voll.storage_power
    assert capped.storage_energy == voll.storage_energy
    assert desk_suite[RunName.EOM_VOLL].welfare.welfare_loss_pct == 0.0


def test_desk_redispatch_improves_welfare(desk_suite):
    pair = desk_suite.rationing
    assert pair is not None
    assert pair.perfect_rationing.welfare >= pair.inefficient_distribution.welfare


def test_capacity_market_carries_capacity_cost(desk_suite):
    m = an.price_and_cost_metrics(desk_suite[RunName.E_PLUS_CM].solution)
    assert m.kappa_ccc > 0
    assert an.price_and_cost_metrics(desk_suite[RunName.EOM_PC].solution).kappa_ccc == 0.0


def test_unit_factor_sweep_has_zero_deltas(desk_suite):
    (point,) = an.credit_sensitivity_sweep(desk_suite, factors=(1.0,))
    assert (point.d_mu_price, point.d_capacity_price, point.d_welfare, point.d_eue) == (0.0, 0.0, 0.0, 0.0)
    assert point.record is desk_suite[RunName.E_PLUS_CM]


def test_suite_files(tmp_path, desk_suite):
    paths = an.write_suite(desk_suite, tmp_path, emission_intensity=10.0)
    for key in ("credits", "credit_curves", "calibration", "cm_curve", "run_metrics", "welfare_table",
                "price_table", "missing_money", "net_revenue_distribution", "storage_reconciliation"):
        assert paths[key].exists(), key
    for run in RunName:
        assert paths[f"{run.value}:prices"].exists()
    header = next(csv.reader(paths["run_metrics"].open()))
    assert header == an.RUN_METRICS_HEADER
    rows = list(csv.reader(paths["welfare_table"].open()))
    assert rows[0] == an.WELFARE_TABLE_HEADER
    assert float(rows[1][0]) == 10.0
    assert next(csv.reader(paths["price_table"].open())) == an.PRICE_TABLE_HEADER

    sweep = an.credit_sensitivity_sweep(desk_suite, factors=(1.0,))
    out = an.write_sweep(sweep, tmp_path / "sweep")
    rows = list(csv.reader(out["sweep_deltas"].open()))
    assert rows[0] == an.SWEEP_HEADER
    assert float(rows[1][0]) == 1.0


def test_fallback_credit_of_variable_generators_uses_peak_availability():
    scen = single_scenario([5.0, 9.0, 7.0], availability={"wind": np.array([0.9, 0.2, 0.6])})
    assert an.fallback_generator_credit(simple_generator("wind", availability_key="wind"), scen) == pytest.approx(0.2)
    assert an.fallback_generator_credit(simple_generator("gas", capacity_credit=0.9), scen) == 0.9
