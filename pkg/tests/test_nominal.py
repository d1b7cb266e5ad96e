import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from afs_pacbf.errors import CoincidentPointError
from afs_pacbf.nominal import NominalParams, line_of_sight, nominal_input
from afs_pacbf.vehicle import VehicleGeometry, VehicleState

GEOM = VehicleGeometry()


@pytest.mark.parametrize("goal,expected", [((1, 0), 0.0), ((0, 1), math.pi / 2), ((9, 9), math.pi / 4)])
def test_line_of_sight_examples(goal, expected):
    assert line_of_sight(VehicleState(0, 0, 0, 0), goal) == pytest.approx(expected, abs=1e-15)


def test_line_of_sight_unwraps_relative_to_heading():
    th = 4 * math.pi + 0.1
    assert line_of_sight(VehicleState(0, 0, th, 0), (1, 0)) == pytest.approx(4 * math.pi)
    # goal directly behind lands on the +pi side of the heading window
    assert line_of_sight(VehicleState(0, 0, 0, 0), (-1, 0)) == pytest.approx(math.pi)


def test_degenerate_goal():
    with pytest.raises(CoincidentPointError):
        line_of_sight(VehicleState(9, 9, 0, 0), (9, 9))


def test_nominal_examples():
    p = NominalParams()
    th_d = line_of_sight(VehicleState(0, 0, 0, 0), (5, 0))
    assert nominal_input(VehicleState(0, 0, th_d, 0), NominalParams(goal=(5, 0)), GEOM) == (1.0, 0.0)
    v, w = nominal_input(VehicleState(0, 0, 0, 0), p, GEOM)
    assert v == 1.0 and w == pytest.approx(2.35619, abs=1e-5)
    _, w = nominal_input(VehicleState(0, 0, 0, math.pi / 6), NominalParams(goal=(5, 0)), GEOM)
    assert w == pytest.approx(-0.5, abs=1e-15)


def test_params_validation():
    with pytest.raises(ValueError):
        NominalParams(v_ref=0.0)
    with pytest.raises(ValueError):
        NominalParams(k_omega=0.0)


pos = st.floats(-20, 20)
ang = st.floats(-3.0, 3.0)


@given(ang)
def test_zero_error_fixed_point(th):
    goal = (10 * math.cos(th), 10 * math.sin(th))
    _, w = nominal_input(VehicleState(0, 0, th, 0), NominalParams(goal=goal), GEOM)
    assert abs(w) < 1e-12


@given(pos, pos, ang)
def test_heading_error_sign(x, y, th):
    st_ = VehicleState(x, y, th, 0.0)
    goal = (0.5, -0.25)
    if math.hypot(x - goal[0], y - goal[1]) < 1e-3:
        return
    err = line_of_sight(st_, goal) - th
    _, w = nominal_input(st_, NominalParams(goal=goal), GEOM)
    assert math.copysign(1, w) == math.copysign(1, err) or err == 0


@given(pos, pos, ang, st.floats(-0.5, 0.5), st.floats(0.1, 5), st.floats(0.1, 5))
def test_gain_linearity(x, y, th, b, k1, k2):
    st_ = VehicleState(x, y, th, b)
    goal = (3.0, 4.0)
    if math.hypot(x - goal[0], y - goal[1]) < 1e-3:
        return
    w1 = nominal_input(st_, NominalParams(goal=goal, k_omega=k1), GEOM)[1]
    w2 = nominal_input(st_, NominalParams(goal=goal, k_omega=k2), GEOM)[1]
    slope = (GEOM.l_f / GEOM.l_r * math.cos(b) + 1) * (line_of_sight(st_, goal) - th)
    assert w2 - w1 == pytest.approx(slope * (k2 - k1), abs=1e-9 * (1 + abs(slope)))


def test_measured_speed_switch():
    st_ = VehicleState(0, 0, 0, 0.3)
    p = NominalParams(use_measured_speed=True)
    _, w_meas = nominal_input(st_, p, GEOM, measured_speed=0.0)
    _, w_ref = nominal_input(st_, NominalParams(), GEOM, measured_speed=0.0)
    assert w_meas - w_ref == pytest.approx(math.sin(0.3))
