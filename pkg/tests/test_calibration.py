import csv
import math

import numpy as np
import pytest
from conftest import simple_generator, simple_storage, toy_case

from ldescm.calibration import (
    CalibrationError,
    NetConeStatus,
    build_cm_demand_curve,
    capacity_target,
    net_cone,
    write_calibration,
    write_cm_curve,
)
from ldescm.domain import CreditCurve, CreditSegment, FixedMix, MarketDesign, RunMode, TechnologyCatalog
from ldescm.planner import assemble, energy_margin, solve_equilibrium


def test_curve_breakpoints_are_exact():
    curve = build_cm_demand_curve(100.0, 60.0)
    assert curve.breakpoints() == [(96.5, 90.0), (100.0, 60.0), (103.5, 0.0)]
    assert curve.price_at(0.0) == 90.0
    assert curve.price_at(96.5) == 90.0
    assert curve.price_at(98.25) == pytest.approx(75.0)
    assert curve.ceiling == 90.0


def test_curve_integral_hand_value():
    curve = build_cm_demand_curve(100.0, 60.0)
    assert curve.benefit(103.5) == pytest.approx(8685.0 + 262.5 + 105.0, abs=1e-9)
    assert curve.benefit(103.5) == pytest.approx(9052.5, abs=1e-9)


@pytest.mark.parametrize("target, nc", [(0.0, 60.0), (-1.0, 60.0), (100.0, 0.0), (100.0, -5.0)])
def test_curve_rejects_nonpositive_inputs(target, nc):
    with pytest.raises(CalibrationError):
        build_cm_demand_curve(target, nc)


def _catalog():
    return TechnologyCatalog((simple_generator("gen"), simple_generator("wind", availability_key="wind")),
                             (simple_storage("store", eta_dis=0.5),))


def test_capacity_target_arithmetic():
    cat = _catalog()
    mix = FixedMix({"gen": 80.0, "wind": 0.0}, {"store": 20.0}, {"store": 20.0 * 4 / 0.5})
    target = capacity_target(mix, cat, {"gen": 1.0, "wind": 0.3}, {"store": CreditCurve.constant(0.5)})
    assert target == pytest.approx(90.0)


def test_capacity_target_uses_curve_at_installed_duration():
    cat = _catalog()
    ramp = CreditCurve((CreditSegment(0.0, 0.1, 0.0, math.inf),))
    mix = FixedMix({"gen": 0.0}, {"store": 10.0}, {"store": 10.0 * 4 / 0.5})
    assert capacity_target(mix, cat, {}, {"store": ramp}) == pytest.approx(4.0)


def test_capacity_target_edge_cases():
    cat = _catalog()
    gens_only = FixedMix({"gen": 50.0, "wind": 10.0})
    assert capacity_target(gens_only, cat, {"gen": 0.9, "wind": 0.2}, {}) == pytest.approx(47.0)
    zero = capacity_target(gens_only, cat, {"gen": 0.0, "wind": 0.0}, {})
    assert zero == 0.0
    with pytest.raises(CalibrationError):
        build_cm_demand_curve(zero, 60.0)
    with pytest.raises(CalibrationError, match="wind"):
        capacity_target(gens_only, cat, {"gen": 1.0}, {})
    with pytest.raises(CalibrationError, match="store"):
        capacity_target(FixedMix({}, {"store": 1.0}, {"store": 1.0}), cat, {}, {})


def _capped_dispatch():
    scen, cat = toy_case()
    voll, pc = 1000.0, 100.0
    bench = solve_equilibrium(assemble(scen, cat, MarketDesign(RunMode.EOM_VOLL, voll=voll, price_cap=pc)))
    mix = bench.fixed_mix()
    design = MarketDesign(RunMode.DISPATCH_FIXED_MIX, voll=voll, price_cap=pc, fixed_capacities=mix, price_capped=True)
    return bench, solve_equilibrium(assemble(scen, cat, design)), cat


def test_benchmark_prices_leave_no_missing_money():
    bench, _, cat = _capped_dispatch()
    result = net_cone(bench.fixed_mix(), bench, cat, reference="gas")
    assert result.status is NetConeStatus.NO_MISSING_MONEY
    assert not result.has_missing_money
    for rec in result.records:
        if rec.installed > 1e-3:
            assert abs(rec.net_cone_uncredited) <= 1e-4 * rec.gross_cost
            assert rec.required_credit is None


def test_capped_prices_create_missing_money_and_required_credits():
    bench, capped, cat = _capped_dispatch()
    mix = bench.fixed_mix()
    result = net_cone(mix, capped, cat, reference="gas", estimated_credits={"gas": 1.0})
    assert result.status is NetConeStatus.OK
    gas = result["gas"]
    # independent re-derivation of the reference economics
    revenue = 0.5 * energy_margin(capped, "gas").sum() / mix.generators["gas"]
    assert gas.net_revenue == pytest.approx(revenue, rel=1e-12)
    assert gas.net_cone_uncredited == pytest.approx(gas.gross_cost - revenue, rel=1e-12)
    assert result.reference_net_cone == gas.net_cone_uncredited
    assert gas.required_credit == pytest.approx(1.0)
    assert gas.net_cone_credited == pytest.approx(gas.net_cone_uncredited)
    store = result["store"]
    spec = cat.storage("store")
    expected_gross = spec.power_cost + spec.energy_cost * mix.storage_energy["store"] / mix.storage_power["store"]
    assert store.gross_cost == pytest.approx(expected_gross)
    assert store.required_credit == pytest.approx(store.net_cone_uncredited / result.reference_net_cone)
    with pytest.raises(KeyError):
        result["nuclear"]


def test_unknown_reference_is_rejected():
    bench, capped, cat = _capped_dispatch()
    with pytest.raises(CalibrationError):
        net_cone(bench.fixed_mix(), capped, cat, reference="nuclear")


def test_desk_calibration(desk_suite):
    cal = desk_suite.calibration
    nc = cal.net_cone
    assert nc.status is NetConeStatus.OK and nc.reference_net_cone > 0
    mix = desk_suite.benchmark_mix()
    for rec in nc.records:
        if rec.installed > 1e-2:
            assert rec.required_credit == pytest.approx(rec.net_cone_uncredited / nc.reference_net_cone)
    assert cal.curve.breakpoints()[1] == pytest.approx((cal.capacity_target, nc.reference_net_cone))
    assert cal.capacity_target == pytest.approx(
        capacity_target(mix, desk_suite.catalog, cal.generator_credits, cal.storage_curves, 1e-2))
    assert all(0.0 <= v <= 1.0 for v in cal.generator_credits.values())


def test_calibration_files(tmp_path, desk_suite):
    cal = desk_suite.calibration
    rows = list(csv.reader(write_calibration(cal.net_cone, tmp_path).open()))
    assert rows[0] == ["technology", "installed_mw", "gross_cost_usd_mw_yr", "energy_net_revenue_usd_mw_yr",
                       "net_cone_uncredited", "net_cone_credited", "cc_required", "cc_estimated"]
    assert {r[0] for r in rows[1:]} == set(desk_suite.catalog.names)
    curve_rows = list(csv.reader(write_cm_curve(build_cm_demand_curve(100.0, 60.0), tmp_path).open()))
    assert curve_rows[0] == ["segment", "start_mw", "end_mw", "start_price", "end_price"]
    assert [float(v) for v in curve_rows[3][1:]] == [100.0, 103.5, 60.0, 0.0]
    assert np.isclose(float(curve_rows[1][2]), 96.5)
