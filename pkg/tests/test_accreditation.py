import csv
import math
from types import SimpleNamespace

import numpy as np
import pytest
from conftest import simple_generator, simple_storage, single_scenario

from ldescm import accreditation as acc
from ldescm.domain import FixedMix, MarketDesign, RunMode, TechnologyCatalog

VOLL, PC = 20300.0, 7549.0


def _stub(fixed, flex, served_fixed, served_flex, mode=RunMode.DISPATCH_FIXED_MIX):
    scen = single_scenario(fixed, flex)
    design = MarketDesign(mode, voll=VOLL, price_cap=PC)
    return SimpleNamespace(design=design, scenarios=scen,
                           served=lambda w: np.asarray(served_fixed, float) + np.asarray(served_flex, float))


def test_shortfall_hand_values():
    threshold = acc.shortfall_threshold(100.0, 2.0, VOLL, PC)
    assert threshold - 100.0 == pytest.approx(1.25626, abs=1e-5)
    at_threshold = acc.unserved_energy(_stub([100.0], 2.0, [100.0], [threshold - 100.0]))
    assert at_threshold.shortfall[0][0] == pytest.approx(0.0, abs=1e-12)
    short = acc.unserved_energy(_stub([100.0], 2.0, [95.0], [0.0]))
    assert short.shortfall[0][0] == pytest.approx(6.25626, abs=1e-5)
    assert short.eue == pytest.approx(short.shortfall[0][0])


def test_full_service_has_no_shortfall():
    series = acc.unserved_energy(_stub([10.0, 20.0], 2.0, [11.0, 21.0], [1.0, 1.0]))
    assert series.eue == 0.0
    assert all(np.all(s == 0) for s in series.shortfall)


def test_uncapped_solutions_need_explicit_opt_in():
    stub = _stub([10.0], 2.0, [10.0], [0.0], mode=RunMode.EOM_VOLL)
    with pytest.raises(ValueError):
        acc.unserved_energy(stub)
    assert acc.unserved_energy(stub, allow_uncapped=True).eue == pytest.approx(2.0 * (VOLL - PC) / VOLL)


def test_eue_equals_resummation(desk_suite):
    for record in desk_suite.runs.values():
        series = record.unserved
        assert series.resum(desk_suite.scenarios) == pytest.approx(series.eue, abs=1e-9)
        assert all(np.all(s >= 0) for s in series.shortfall)


# --- toy system: one firm unit, surplus wind before a 1 MW shortfall ---------------


def _toy():
    scen = single_scenario([5.0, 11.0, 5.0], 0.0, availability={"wind": np.array([1.0, 0.0, 0.0])})
    cat = TechnologyCatalog(
        (simple_generator("firm", 10.0, 100.0), simple_generator("wind", 0.0, 50.0, availability_key="wind")),
        (simple_storage("store", eta_ch=0.8, eta_dis=1.0),),
    )
    mix = FixedMix({"firm": 10.0, "wind": 10.0}, {"store": 0.0}, {"store": 0.0})
    return scen, cat, mix, MarketDesign(RunMode.EOM_PC, voll=VOLL, price_cap=PC)


def test_toy_credits():
    scen, cat, mix, design = _toy()
    res = acc.accredit(mix, scen, cat, design, epsilon=0.01, durations=[1.0, 2.0])
    assert res.credits_defined
    assert res.eue_0 == pytest.approx(1.0, abs=1e-7)
    assert res.eue_0 - res.eue_ref == pytest.approx(0.01, abs=1e-8)
    credits = res.generator_credits()
    assert credits[acc.reference_generator().name] == 1.0
    assert credits["firm"] == pytest.approx(1.0, abs=1e-6)
    # wind only blows before the shortfall: no adequacy value
    assert credits["wind"] == pytest.approx(0.0, abs=1e-6)
    # storage charges from surplus wind and covers the shortfall
    for duration, credit in res.storage_points("store"):
        assert credit == pytest.approx(1.0, abs=1e-6), duration


def test_estimates_are_ordered_by_resource_and_duration():
    scen, cat, mix, design = _toy()
    res = acc.accredit(mix, scen, cat, design, durations=[2.0, 1.0], paradigm="CHARGING_FIXED")
    keys = [(e.resource, -1.0 if e.duration is None else e.duration) for e in res.estimates]
    assert keys == sorted(keys)
    assert all(e.paradigm is acc.Paradigm.CHARGING_FIXED for e in res.estimates)


def test_scarcity_free_system_reports_undefined_credits():
    scen, cat, mix, design = _toy()
    res = acc.accredit(mix.with_addition("firm", 5.0), scen, cat, design, durations=[1.0])
    assert not res.credits_defined
    assert "scarcity-free" in res.diagnostic
    assert res.estimates == []


def test_epsilon_must_be_positive():
    scen, cat, mix, design = _toy()
    with pytest.raises(ValueError):
        acc.accredit(mix, scen, cat, design, epsilon=0.0)


def test_desk_credits_monotone_and_saturating(desk_suite):
    result = desk_suite.calibration.accreditation
    for s in desk_suite.catalog.storages:
        credits = [round(c, 6) for _, c in result.storage_points(s.name)]
        assert credits == sorted(credits)
        assert all(c <= 1.0 + 1e-3 for c in credits)
        # the grid stops once two consecutive credits saturate
        assert credits[-2:] == pytest.approx([1.0, 1.0], abs=acc.SATURATION_TOLERANCE)


def test_parallel_accreditation_matches_serial():
    scen, cat, mix, design = _toy()
    serial = acc.accredit(mix, scen, cat, design, durations=[1.0, 2.0, 4.0])
    parallel = acc.accredit(mix, scen, cat, design, durations=[1.0, 2.0, 4.0], workers=2)
    assert [(e.resource, e.duration, e.credit) for e in serial.estimates] == \
           [(e.resource, e.duration, e.credit) for e in parallel.estimates]


# --- credit-curve fitting -----------------------------------------------------------------


def _pwl(x):
    return np.minimum(0.1 * x, 0.3 + 0.025 * x)


def test_fit_recovers_two_segment_curve_exactly():
    x = np.array([1.0, 2.0, 4.0, 8.0, 12.0, 16.0, 24.0])
    fit = acc.fit_credit_curve(list(zip(x, _pwl(x))), segment_count=2)
    assert fit.r_squared == pytest.approx(1.0, abs=1e-12)
    np.testing.assert_allclose(fit.curve.evaluate(x), _pwl(x), atol=1e-10)
    assert not fit.warning
    assert fit.curve.violations() == []


def test_fit_of_constant_credits_is_flat():
    fit = acc.fit_credit_curve([(z, 1.0) for z in (1.0, 2.0, 4.0, 8.0, 16.0)], segment_count=4)
    assert fit.curve.evaluate([0.5, 3.0, 100.0]) == pytest.approx([1.0, 1.0, 1.0])
    assert fit.curve.segments[-1].slope == pytest.approx(0.0, abs=1e-12)


def test_fit_of_saturating_ramp():
    x = np.array(acc.DEFAULT_DURATIONS)
    fit = acc.fit_credit_curve(list(zip(x, np.minimum(1.0, x / 8.0))), segment_count=4)
    assert fit.r_squared > 0.999
    slopes = [s.slope for s in fit.curve.segments]
    assert all(s >= 0 for s in slopes)
    assert slopes == sorted(slopes, reverse=True)


def test_fit_flags_non_concave_data():
    pts = [(1.0, 0.0), (2.0, 0.0), (4.0, 0.0), (8.0, 0.9), (16.0, 1.0)]
    fit = acc.fit_credit_curve(pts, segment_count=2)
    assert fit.warning and fit.message
    assert fit.curve.violations() == []


def test_fit_rejects_bad_inputs():
    with pytest.raises(ValueError):
        acc.fit_credit_curve([(1.0, 0.1), (2.0, 0.2)], segment_count=4)
    with pytest.raises(ValueError):
        acc.fit_credit_curve([(1.0, 0.1), (1.0, 0.2), (3.0, 0.3)], segment_count=1)


def test_credit_files(tmp_path, desk_suite):
    cal = desk_suite.calibration
    p = acc.write_credits([cal.accreditation], tmp_path)
    rows = list(csv.reader(p.open()))
    assert rows[0] == ["resource", "duration_h", "paradigm", "EUE_0", "EUE_ref", "EUE_r", "credit"]
    assert any(r[0] == "ldes" and r[1] for r in rows[1:])
    q = acc.write_credit_curves(cal.fits, tmp_path)
    header = next(csv.reader(q.open()))
    assert header[:4] == ["resource", "segment", "alpha", "beta_per_h"]
    assert "r_squared" in header
    assert math.isfinite(float(rows[1][-1]))
