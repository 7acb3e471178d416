import numpy as np
import pytest
from hypothesis import given, strategies as st

from hybrid_alloc.errors import DomainError, InfeasibleError
from hybrid_alloc.propulsion import (BatteryPack, Engine, Motor, PowertrainConfig, battery_current,
                                     calibrate_fuel_coefficients, engine_alone_throttle,
                                     fuel_flow, power_split_feasible, sfc)


def _pt(c1=9e-8, c2=0.01, limit=False):
    return PowertrainConfig(Engine(560e3, c1, c2, 153.0), Motor(280e3, 0.95, 72.0),
                            BatteryPack(150, 2, 3.6, 200.0, 3.96), 0.7, limit)


def test_pack_aggregates():
    pack = BatteryPack(150, 2, 3.6, 200.0, 3.96)
    assert pack.voltage == pytest.approx(540.0)
    assert pack.capacity == pytest.approx(400.0)
    assert pack.mass == pytest.approx(1188.0)
    assert pack.with_parallel(3).capacity == pytest.approx(600.0)


def test_fuel_flow_intercept():
    eng = Engine(560e3, 9e-8, 0.01, 153.0)
    assert fuel_flow(eng, 0.0) == 0.01


def test_fuel_flow_outside_range():
    eng = Engine(560e3, 9e-8, 0.01, 153.0)
    with pytest.raises(DomainError):
        fuel_flow(eng, 560e3 * 1.01)
    with pytest.raises(DomainError):
        sfc(eng, 0.0)


def test_flat_sfc_without_intercept():
    eng = Engine(560e3, 9e-8, 0.0, 153.0)
    for p in (1e5, 3e5, 5.6e5):
        assert sfc(eng, p) == pytest.approx(3.6e6 * 9e-8, rel=1e-14)


@given(st.floats(1e-9, 1e-6), st.floats(1e-6, 0.1))
def test_sfc_falls_with_power(c1, c2):
    eng = Engine(560e3, c1, c2, 153.0)
    assert sfc(eng, eng.p_max) < sfc(eng, eng.p_max / 2)


def test_equal_anchor_sfc_gives_zero_intercept():
    c1, c2 = calibrate_fuel_coefficients((2e5, 0.36), (5e5, 0.36))
    assert c2 == pytest.approx(0.0, abs=1e-18)


@given(st.floats(5e4, 4e5), st.floats(0.3, 0.45), st.floats(4.5e5, 1.2e6), st.floats(0.3, 0.45))
def test_calibration_interpolates_anchors(p1, s1, p2, s2):
    c1, c2 = calibrate_fuel_coefficients((p1, s1), (p2, s2))
    for p, s in ((p1, s1), (p2, s2)):
        assert 3.6e6 * (c1 * p + c2) / p == pytest.approx(s, rel=1e-12)


def test_default_calibration_regression(aircraft):
    eng = aircraft.engine
    assert eng.p_max == 1.12e6
    assert eng.c1 == pytest.approx(8.849561230802723e-08, rel=1e-12)
    assert eng.c2 == pytest.approx(0.009773803103898387, rel=1e-12)


def test_calibrated_sfc_at_cruise_and_max(aircraft, mission):
    eng = aircraft.engine
    p_cruise = aircraft.cruise_power(mission.m0, mission.cruise_speed, mission.altitude) / 0.7
    assert 0.367 <= sfc(eng, p_cruise) <= 0.369
    assert sfc(eng, eng.p_max) == pytest.approx(0.35, abs=1e-12)


def test_engine_alone_throttle_zero_current():
    pt = _pt()
    p_req = 300e3
    assert battery_current(pt, p_req, engine_alone_throttle(pt, p_req)) == pytest.approx(0.0, abs=1e-9)


def test_motor_alone_current():
    pt = _pt()
    assert battery_current(pt, 300e3, 0.0) == pytest.approx(300e3 / (0.7 * 0.95 * 540.0), rel=1e-14)


def test_full_throttle_charging_current():
    i = battery_current(_pt(), 300e3, 1.0)
    assert i == pytest.approx((300e3 / 0.7 - 560e3) / (0.95 * 540.0), rel=1e-14)
    assert i == pytest.approx(-256.2, abs=0.05)


def test_motor_limit_enforced_only_when_asked():
    assert battery_current(_pt(), 0.0, 1.0) < 0
    with pytest.raises(InfeasibleError):
        battery_current(_pt(limit=True), 0.0, 1.0)


def test_power_split_feasibility():
    pt = _pt()
    assert power_split_feasible(pt, 0.0)
    assert power_split_feasible(pt, 0.7 * (560e3 + 280e3))
    assert not power_split_feasible(pt, 600e3)
    np.testing.assert_allclose(0.7 * (560e3 + 280e3), 588e3)


def test_invalid_components():
    with pytest.raises(DomainError):
        Engine(560e3, -1e-8, 0.01, 153.0)
    with pytest.raises(DomainError):
        Motor(280e3, 1.2, 72.0)


def test_average_sfc_over_operating_band(aircraft):
    eng = aircraft.engine
    p = np.linspace(0.4 * eng.p_max, eng.p_max, 2001)
    avg = np.mean([sfc(eng, x) for x in p])
    assert avg * 1000.0 == pytest.approx(356.0, rel=0.05)
