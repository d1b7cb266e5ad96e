import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from afs_pacbf import barrier as bar
from afs_pacbf.barrier import BarrierParams, Obstacle, PacbfState
from afs_pacbf.errors import BarrierDomainError, CoincidentPointError
from afs_pacbf.validation import fd_rates, _err
from afs_pacbf.vehicle import ActuatorParams, AffineActuator, AugmentedState, VehicleGeometry, VehicleState

GEOM = VehicleGeometry()
AP = ActuatorParams()
BP = BarrierParams()
OBS1 = Obstacle(4.0, 4.5, 1.0)


def aug(*z):
    return AugmentedState.from_array(z)


@pytest.mark.parametrize("obs,expected", [((1, 0), 0.0), ((-1, 0), math.pi / 2), ((1, 1), math.pi / 4)])
def test_eta_examples(obs, expected):
    assert bar.eta(VehicleState(0, 0, 0, 0), Obstacle(*obs, 0.5)) == pytest.approx(expected, abs=1e-15)


def test_eta_wraps_before_clamping():
    # obstacle just behind-left: raw difference near +pi must not clamp to -pi/2
    assert bar.eta(VehicleState(0, 0, 0, 0), Obstacle(-1, 0.01, 0.5)) == pytest.approx(math.pi / 2)
    assert bar.eta(VehicleState(0, 0, 0, 0), Obstacle(-1, -0.01, 0.5)) == pytest.approx(-math.pi / 2)
    assert bar.eta(VehicleState(0, 0, 6 * math.pi, 0), Obstacle(1, 1, 0.5)) == pytest.approx(math.pi / 4)


def test_eta_coincident():
    with pytest.raises(CoincidentPointError):
        bar.eta(VehicleState(4, 4.5, 0, 0), OBS1)


def test_h_values_examples():
    h0, h1, h2 = bar.h_values(VehicleState(0, 0, 0, 0), OBS1, BP)
    assert h0 == pytest.approx(35.25, abs=1e-12)
    h0, h1, h2 = bar.h_values(VehicleState(0, 0, 0, 0), Obstacle(-2, 0, 1), BarrierParams(r_s=3.7))
    assert h1 == 3.0
    # h1 = d_min^2 exactly -> h2 = 0; vehicle heading away so cos(eta) = 0
    d = math.sqrt(1.0 + BP.d_min ** 2)
    assert bar.h_values(VehicleState(-d, 0, math.pi, 0), Obstacle(0, 0, 1), BP)[2] == pytest.approx(0, abs=1e-15)


def test_domain_error_inside_expanded_region():
    with pytest.raises(BarrierDomainError):
        bar.h_values(VehicleState(3.0, 4.5, 0, 0), OBS1, BP)
    with pytest.raises(BarrierDomainError):
        bar.barrier_chain(aug(3.0, 4.5, 0, 0, 1, 0), PacbfState(), OBS1, BP, GEOM, AP)


def test_params_validation():
    with pytest.raises(ValueError):
        Obstacle(0, 0, 0)
    with pytest.raises(ValueError):
        BarrierParams(r_s=0)
    with pytest.raises(ValueError):
        BarrierParams(d_min=-1)


def test_stationary_vehicle_has_zero_rate():
    ev = bar.barrier_chain(aug(0.3, -1, 0.7, 0.2, 0, 0), PacbfState(), OBS1, BP, GEOM, AP)
    assert ev.h2_dot == 0.0


def test_clamped_branch_kills_heading_pathway():
    # obstacle behind the vehicle: eta clamped, h2 independent of theta_f
    ev = bar.barrier_chain(aug(8, 8, 0.0, 0.1, 0.7, 0.2), PacbfState(), OBS1, BP, GEOM, AP)
    assert abs(ev.eta) == pytest.approx(math.pi / 2)
    assert ev.lglf_h2[1] == 0.0
    assert ev.lglf_h2[0] != 0.0
    assert not ev.clamp_flag


def test_clamp_boundary_flag_and_tie():
    # bearing exactly pi/2 to the left: tie resolves to the clamped branch
    ev = bar.barrier_chain(aug(0, 0, 0, 0, 1, 0.1), PacbfState(), Obstacle(0, 3, 1), BP, GEOM, AP)
    assert ev.clamp_flag
    assert ev.lglf_h2[1] == 0.0
    assert ev.h1 == pytest.approx(9 - 1)
    ev = bar.barrier_chain(aug(0, 0, 1e-7, 0, 1, 0.1), PacbfState(), Obstacle(0, 3, 1), BP, GEOM, AP)
    assert ev.clamp_flag
    ev = bar.barrier_chain(aug(0, 0, 0.1, 0, 1, 0.1), PacbfState(), Obstacle(0, 3, 1), BP, GEOM, AP)
    assert not ev.clamp_flag


def _random_state(data):
    x = data.draw(st.floats(-6, 6))
    y = data.draw(st.floats(-6, 6))
    th = data.draw(st.floats(-7, 7))
    beta = data.draw(st.floats(-0.57, 0.57))
    v = data.draw(st.floats(-1.5, 1.5))
    w = data.draw(st.floats(-0.6, 0.6))
    return np.array([x, y, th, beta, v, w])


@given(st.data())
def test_derivatives_match_finite_differences(data):
    z = _random_state(data)
    obs = Obstacle(0.0, 0.0, 1.0)
    try:
        ev = bar.barrier_chain(z, 0.5, obs, BP, GEOM, AP)
    except (BarrierDomainError, CoincidentPointError):
        return
    diff = math.atan2(-z[1], -z[0]) - z[2]
    diff = (diff + math.pi) % (2 * math.pi) - math.pi
    if ev.h1 < 0.05 or abs(abs(diff) - math.pi / 2) < 0.01:
        return
    u = np.array([[data.draw(st.floats(-1, 1)), data.draw(st.floats(-0.4, 0.4))]])
    O = np.array([[obs.x_o, obs.y_o, obs.R_o]])
    params = (GEOM.l_f, GEOM.l_r, AP.k1, AP.k2)
    d1, d2 = fd_rates(z[None, :], u, O, BP.r_s, BP.d_min, params)
    assert _err(np.array([ev.h2_dot]), d1)[0] <= 1
    est = ev.lf2_h2 + ev.lglf_h2[0] * u[0, 0] + ev.lglf_h2[1] * u[0, 1]
    assert _err(np.array([est]), d2)[0] <= 1


@given(st.data())
def test_reconstruction_identity(data):
    z = _random_state(data)
    p1 = data.draw(st.floats(0, 3))
    try:
        ev = bar.barrier_chain(z, PacbfState(p1), OBS1, BP, GEOM, AP)
    except (BarrierDomainError, CoincidentPointError):
        return
    assert ev.psi1 == ev.h2_dot + p1 * ev.h2 * ev.h2
    a, b = bar.pacbf_constraint_row(ev, PacbfState(p1))
    assert a[4] == -(ev.h2_dot + p1 * ev.h2 * ev.h2)
    assert a[2] == -(ev.h2 * ev.h2) and a[3] == 0.0
    assert np.all(np.isfinite(a))
    # rebuilding from scratch is bit-identical
    ev2 = bar.barrier_chain(z, PacbfState(p1), OBS1, BP, GEOM, AP)
    assert ev2 == ev


@given(st.data())
def test_row_matches_direct_psi2(data):
    z = _random_state(data)
    try:
        ev = bar.barrier_chain(z, 0.5, OBS1, BP, GEOM, AP)
    except (BarrierDomainError, CoincidentPointError):
        return
    x = np.array([data.draw(st.floats(-1, 1)), data.draw(st.floats(-0.4, 0.4)),
                  data.draw(st.floats(-2, 2)), data.draw(st.floats(-1, 1)), data.draw(st.floats(0, 3))])
    a, b = bar.pacbf_constraint_row(ev, 0.5)
    psi2 = bar.psi2_value(ev, 0.5, x[:2], x[2], x[4])
    assert a @ x - b == pytest.approx(-psi2, abs=1e-9 * (1 + abs(psi2)))
    if abs(psi2) > 1e-9:
        assert (a @ x <= b) == (psi2 >= 0)


def test_row_at_zero_barrier_has_no_nu_coefficient():
    d = math.sqrt(1.0 + BP.d_min ** 2)
    ev = bar.barrier_chain(aug(-d, 0, math.pi, 0, 0.5, 0), 0.5, Obstacle(0, 0, 1), BP, GEOM, AP)
    assert ev.h2 == pytest.approx(0.0, abs=1e-15)
    a, _ = bar.pacbf_constraint_row(ev, 0.5)
    assert abs(a[2]) < 1e-28


def test_row_from_frozen_scenario_state(filtered_run):
    records, _ = filtered_run
    rec = records[len(records) // 3]
    for j, o in enumerate(rec.obstacles):
        ev = bar.barrier_chain(rec.z, o.p1, _default_obstacles()[j], BP, GEOM, AP)
        x = np.array([rec.u_cmd[0], rec.u_cmd[1], o.nu1, o.delta1, o.p2])
        a, b = bar.pacbf_constraint_row(ev, o.p1)
        psi2 = bar.psi2_value(ev, o.p1, rec.u_cmd, o.nu1, o.p2)
        assert psi2 == pytest.approx(o.psi2, abs=1e-12)
        assert (a @ x <= b + 1e-9) == (psi2 >= -1e-9)


def _default_obstacles():
    from afs_pacbf.config import default_config

    return default_config().obstacles


def test_nu_positivity_row():
    a, b = bar.nu_positivity_row(PacbfState(0.0))
    assert b == 0.0 and list(a) == [0, 0, -1, 0, 0]
    a, b = bar.nu_positivity_row(PacbfState(0.5))
    assert b == 0.5
    assert -1.0 * -0.5 <= b and not (a @ [0, 0, -0.6, 0, 0] <= b)


def test_clf_row_examples():
    a, b = bar.clf_row(PacbfState(0.5), 0.5, 1.0)
    assert list(a) == [0, 0, 0, -1, 0] and b == 0.0
    a, b = bar.clf_row(PacbfState(1.0), 0.5, 1.0)
    assert list(a) == [0, 0, 1, -1, 0] and b == -0.25
    a3, b3 = bar.clf_row(PacbfState(1.0), 0.5, 3.0)
    assert np.array_equal(a, a3) and b3 == 3 * b
    with pytest.raises(ValueError):
        bar.clf_row(PacbfState(1.0), 0.5, -1.0)


@given(st.floats(1e-6, 1e3), st.floats(1e-6, 1e3))
def test_h2_monotone_in_h1(a, b):
    # h2 = ln(h1 / d_min^2) via a vehicle heading away from the obstacle (cos eta = 0)
    def h2_at(h1):
        d = math.sqrt(h1 + 1.0)
        return bar.h_values(VehicleState(-d, 0, math.pi, 0), Obstacle(0, 0, 1), BP)
    if a == b:
        return
    (_, h1a, h2a), (_, h1b, h2b) = h2_at(a), h2_at(b)
    assert (h2a < h2b) == (h1a < h1b)
    assert (h2a >= 0) == (h1a >= BP.d_min ** 2)


def test_equal_relative_degree(rng):
    hits = 0
    for _ in range(300):
        z = np.array([rng.uniform(-5, 5), rng.uniform(-5, 5), rng.uniform(-3, 3),
                      rng.uniform(-0.5, 0.5), rng.uniform(0.2, 1), rng.uniform(-0.4, 0.4)])
        try:
            ev = bar.barrier_chain(z, 0.5, Obstacle(0, 0, 1), BP, GEOM, AP)
        except (BarrierDomainError, CoincidentPointError):
            continue
        if abs(ev.eta) < math.pi / 2 - 1e-3:
            assert ev.lglf_h2[0] != 0.0 and ev.lglf_h2[1] != 0.0
            hits += 1
    assert hits > 50


def test_generic_dual_path_matches_kernel(rng):
    lag = AffineActuator(lambda u, p: (-p.k1 * u[0], -p.k2 * u[1]),
                         lambda u, p: ((p.k1, 0.0), (0.0, p.k2)))
    for _ in range(20):
        z = np.array([rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-3, 3),
                      rng.uniform(-0.5, 0.5), rng.uniform(-1, 1), rng.uniform(-0.4, 0.4)])
        a = bar.barrier_chain(z, 0.5, OBS1, BP, GEOM, AP)
        b = bar.barrier_chain(z, 0.5, OBS1, BP, GEOM, AP, actuator=lag)
        for k in ("h2", "h2_dot", "lf2_h2", "psi1"):
            assert getattr(b, k) == pytest.approx(getattr(a, k), rel=1e-12, abs=1e-13)
        np.testing.assert_allclose(b.lglf_h2, a.lglf_h2, rtol=1e-12, atol=1e-13)


def test_integrate_penalty():
    p = PacbfState(0.5)
    assert bar.integrate_penalty(p, -10.0, 0.01) == 0.0
    assert p.p1 == pytest.approx(0.4)
    floored = bar.integrate_penalty(p, -100.0, 0.01)
    assert p.p1 == 0.0 and floored == pytest.approx(0.6)


def test_locus_values():
    from afs_pacbf.outputs import locus

    t = locus(BP, Obstacle(0, 0, 1), 0.0, 181)
    mid = t[90]
    assert mid[0] == 0.0
    assert mid[1] == pytest.approx(math.sqrt(0.25 + (1 + math.sqrt(2)) ** 2), abs=1e-12)
    assert mid[1] == pytest.approx(2.46554, abs=1e-4)
    for row in (t[0], t[-1]):
        assert row[1] == pytest.approx(1.11803, abs=1e-4)
        assert row[4] == pytest.approx(1.0, abs=1e-12)
    # boundary distance non-increasing in |eta|
    half = t[90:, 1]
    assert np.all(np.diff(half) <= 1e-15)
    # every emitted boundary point satisfies h2 = 0 for the stated heading
    for row in t[1:-1:7]:
        h = bar.h_values(VehicleState(row[2], row[3], 0.0, 0.0), Obstacle(0, 0, 1), BP)
        assert h[2] == pytest.approx(0.0, abs=1e-9)
