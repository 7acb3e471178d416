import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import solve_ivp

from hybrid_alloc import config
from hybrid_alloc.arc_solver import (BOUNDARY, MAX, MIN, ArcParameters, boundary_control,
                                     chain_states, objective, propagate_arc,
                                     reconstruct_trajectory, residuals, solve, solve_no_charge)
from hybrid_alloc.errors import InfeasibleError
from hybrid_alloc.oracle import ThrottleProfile, simulate
from hybrid_alloc.scaling import arc_coefficients, build_scaled_ocp


def test_zero_duration_is_identity(ocp, coeffs):
    for kind in (MAX, BOUNDARY, MIN):
        assert propagate_arc(kind, ocp, coeffs, (0.97, 0.83), 0.0) == (0.97, 0.83)


def test_max_arc_mass_is_linear(ocp, coeffs):
    for d in (0.1, 0.25, 0.6):
        m, _ = propagate_arc(MAX, ocp, coeffs, (1.0, 0.7), d)
        assert m == pytest.approx(1.0 + (ocp.k11 + ocp.k10) * d, abs=1e-15)


@pytest.mark.parametrize("kind, tau, start", [(MAX, 1.0, (1.0, 0.7)),
                                              (BOUNDARY, "feedback", (0.97, 1.0)),
                                              (MIN, 0.0, (0.96, 1.0))])
def test_arcs_match_rk4(ocp, coeffs, kind, tau, start):
    for d in (0.15, 0.5, 0.9):
        exact = propagate_arc(kind, ocp, coeffs, start, d)
        sim = simulate(ocp, ThrottleProfile(((0.0, d, tau),)), steps=10000, start=start)
        np.testing.assert_allclose((sim.mhat, sim.qhat), exact, rtol=0, atol=1e-8)


def test_boundary_control_holds_charge(ocp):
    for m in np.linspace(0.94, 1.0, 7):
        tau = boundary_control(ocp, m)
        assert ocp.charge_rate(m, tau) == pytest.approx(0.0, abs=1e-14)


def test_boundary_control_slope_sign(ocp):
    # lighter aircraft needs less power, so the charge-holding throttle drops
    m = np.linspace(0.94, 1.0, 7)
    slope = -(2.0 * ocp.k22 * m + ocp.k23) / ocp.k21
    tau = [boundary_control(ocp, x) for x in m]
    assert (slope > 0).all()
    assert (np.diff(tau) > 0).all()


def test_forward_shoot_zeroes_entry_residual(ocp, coeffs):
    grid = np.linspace(0.0, 0.5, 200001)
    q = propagate_arc(MAX, ocp, coeffs, (1.0, ocp.qhat0), 1.0)  # warm the path
    from scipy.optimize import brentq
    xi1 = brentq(lambda t: propagate_arc(MAX, ocp, coeffs, (1.0, ocp.qhat0), t)[1] - 1.0,
                 0.0, 0.5, xtol=1e-15)
    r = residuals(ArcParameters(xi1, 0.5, 0.5 - xi1, 0.96), ocp, coeffs)
    assert abs(r[0]) <= 1e-12
    assert r[3] == pytest.approx(0.0, abs=1e-15)


def test_reference_optimum_under_sea_level_coefficients(cfg):
    # sea-level density and a 480 kg mass unit reproduce the reference optimum closely,
    # not exactly: the fuel law and scaling constants behind it are unknown
    sea = config.copy_config(cfg)
    sea.mission.air_density = 1.225
    ocp = build_scaled_ocp(config.build_aircraft(sea), config.mission_spec(sea), mass_scale=480.0)
    c = arc_coefficients(ocp)
    reference = np.array([0.1807, 0.6801, 0.1392, 0.3706])
    assert np.max(np.abs(residuals(reference, ocp, c))) < 0.02
    sol = solve(ocp)
    np.testing.assert_allclose(sol.params.as_array(), reference, atol=0.02)
    np.testing.assert_allclose(sol.duals[:3], [-0.1253, -0.1272, 0.9971], atol=2e-3)


def test_solution_chains_consistently(ocp, coeffs, solution):
    assert solution.structure == "max-boundary-min"
    assert solution.residual_norm <= 1e-10
    s3 = chain_states(ocp, coeffs, solution.params)[3]
    assert -solution.objective == pytest.approx(s3[0], abs=1e-10)
    assert s3[1] == pytest.approx(ocp.qhatf, abs=1e-10)
    assert solution.params.xi1 + solution.params.xi2 + solution.params.xi3 == pytest.approx(1.0)
    assert 0.0 <= solution.params.z <= 1.0


def test_boundary_throttle_interior(ocp, coeffs, solution):
    p = solution.params
    s1 = chain_states(ocp, coeffs, p)[1]
    for d in np.linspace(0.0, p.xi2, 50):
        m, _ = propagate_arc(BOUNDARY, ocp, coeffs, s1, d)
        assert 0.0 < boundary_control(ocp, m) < 1.0


def test_trajectory_structure(ocp, solution, aircraft):
    tr = reconstruct_trajectory(solution, ocp, 401)
    arcs = np.array(tr.arc)
    assert (np.diff(tr.mass) < 0).all()
    assert (tr.throttle[arcs == "max"] == 1.0).all()
    assert (tr.throttle[arcs == "min"] == 0.0).all()
    q_b = tr.charge[arcs == "boundary"]
    np.testing.assert_allclose(q_b, aircraft.battery.capacity, atol=1e-9 * aircraft.battery.capacity)
    sfc_max = np.nanmax(tr.sfc[arcs == "max"])
    sfc_b = tr.sfc[arcs == "boundary"]
    assert sfc_max == pytest.approx(0.35, abs=1e-9)
    assert sfc_max < sfc_b.min()
    assert 0.366 <= sfc_b.min() and sfc_b.max() <= 0.370
    assert tr.t[-1] == pytest.approx(4000.0)


def test_no_charge_full_window_equals_engine_alone(cfg, aircraft):
    m = config.mission_spec(cfg, soc_f=0.7)
    ocp = build_scaled_ocp(aircraft, m)
    sol = solve_no_charge(ocp)
    assert sol.params.xi2 == pytest.approx(1.0, abs=1e-12)
    pt = aircraft.powertrain

    def rhs(t, y):
        p = aircraft.cruise_power(y[0], m.cruise_speed, m.altitude) / pt.prop_efficiency
        return [-(pt.engine.c1 * p + pt.engine.c2)]

    ref = solve_ivp(rhs, (0.0, m.duration), [m.m0], rtol=1e-12, atol=1e-9).y[0, -1]
    assert sol.fuel_burned == pytest.approx(m.m0 - ref, rel=1e-9)


def test_no_charge_rejects_charging_mission(cfg, aircraft):
    ocp = build_scaled_ocp(aircraft, config.mission_spec(cfg, soc0=0.4, soc_f=0.7))
    with pytest.raises(InfeasibleError):
        solve_no_charge(ocp)


def test_no_charge_case_study(ocp, solution):
    nc = solve_no_charge(ocp)
    assert nc.structure == "boundary-min"
    assert nc.fuel_burned > solution.fuel_burned


def test_full_pack_start_has_no_max_arc(cfg, aircraft):
    sol = solve(build_scaled_ocp(aircraft, config.mission_spec(cfg, soc0=1.0)))
    assert sol.params.xi1 == pytest.approx(0.0, abs=1e-9)
    assert sol.residual_norm <= 1e-10


def test_pack_never_fills(cfg, aircraft):
    ocp = build_scaled_ocp(aircraft, config.mission_spec(cfg, soc0=0.2, soc_f=0.3, range=1e5))
    sol = solve(ocp)
    assert sol.structure == "max-min"
    assert sol.params.xi2 == 0.0
    assert np.isnan(sol.duals).all()
    s = chain_states(ocp, arc_coefficients(ocp), sol.params)
    assert s[1][1] < 1.0
    assert s[3][1] == pytest.approx(ocp.qhatf, abs=1e-12)


def test_objective_is_final_mass(ocp, solution):
    assert objective(solution.params, ocp) == solution.objective


@settings(max_examples=25, deadline=None)
@given(st.floats(150e3, 450e3), st.floats(85.0, 105.0), st.floats(5800.0, 6900.0),
       st.floats(0.3, 1.0), st.floats(0.2, 1.0))
def test_charging_never_worse(rng_range, speed, m0, soc0, soc_f):
    cfg = config.default_config()
    ac = config.build_aircraft(cfg)
    if soc_f > soc0:
        soc0, soc_f = soc_f, soc0
    ocp = build_scaled_ocp(ac, config.mission_spec(cfg, range=rng_range, cruise_speed=speed,
                                                   m0=m0, soc0=soc0, soc_f=soc_f))
    charged = solve(ocp)
    assert charged.residual_norm <= 1e-10
    assert charged.fuel_burned <= solve_no_charge(ocp).fuel_burned + 1e-9
