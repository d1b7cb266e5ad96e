"""Line-of-sight goal-reaching law for the articulation rate."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Tuple

from .errors import CoincidentPointError
from .vehicle import VehicleGeometry, VehicleState


@dataclass(frozen=True)
class NominalParams:
    v_ref: float = 1.0
    k_omega: float = 1.5
    goal: Tuple[float, float] = (9.0, 9.0)
    # evaluate the sin(beta) feedback with measured v_f instead of v_ref
    use_measured_speed: bool = False

    def __post_init__(self):
        if self.v_ref == 0:
            raise ValueError("v_ref must be nonzero")
        if self.k_omega <= 0:
            raise ValueError("k_omega must be positive")


def line_of_sight(state: VehicleState, goal) -> float:
    """Bearing to ``goal``, unwrapped into ``(theta_f - pi, theta_f + pi]``."""
    dx = goal[0] - state.x_f
    dy = goal[1] - state.y_f
    if math.hypot(dx, dy) <= 1e-9:
        raise CoincidentPointError("vehicle is at the goal; line of sight undefined")
    bearing = math.atan2(dy, dx)
    err = bearing - state.theta_f
    err -= 2.0 * math.pi * math.ceil((err - math.pi) / (2.0 * math.pi))
    return state.theta_f + err


def nominal_input(
    state: VehicleState,
    params: NominalParams,
    geom: VehicleGeometry,
    measured_speed: float | None = None,
) -> Tuple[float, float]:
    """Nominal ``(v_ref, u_betadot_ref)``; not clipped to actuator bounds."""
    theta_d = line_of_sight(state, params.goal)
    omega_ref = params.k_omega * (theta_d - state.theta_f)
    v = params.v_ref
    if params.use_measured_speed and measured_speed is not None:
        v = measured_speed
    ratio = geom.l_f / geom.l_r
    u_bdot = -(v / geom.l_r) * math.sin(state.beta) + (ratio * math.cos(state.beta) + 1.0) * omega_ref
    return params.v_ref, u_bdot
