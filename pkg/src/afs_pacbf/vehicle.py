"""Articulated-frame-steering kinematics with affine actuator dynamics.

The augmented state is ``z = [x_f, y_f, theta_f, beta, v_f, u_betadot]``.  The
commanded input reaches the pose only through the actuator states, so

    z_dot = f_z(z) + g_z(z) u_cmd,   g_z = [0_{4x2}; g_u(u)].
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, NamedTuple, Sequence

import numpy as np

from . import dual
from .errors import SingularKinematicsError

SINGULAR_TOL = 1e-9
STATE_DIM = 6


@dataclass(frozen=True)
class VehicleState:
    x_f: float
    y_f: float
    theta_f: float  # unwrapped
    beta: float


@dataclass(frozen=True)
class ActuatorState:
    v_f: float
    u_betadot: float


@dataclass(frozen=True)
class AugmentedState:
    vehicle: VehicleState
    actuator: ActuatorState

    def as_array(self) -> np.ndarray:
        v, a = self.vehicle, self.actuator
        return np.array([v.x_f, v.y_f, v.theta_f, v.beta, a.v_f, a.u_betadot], dtype=float)

    @classmethod
    def from_array(cls, z: Sequence[float]) -> "AugmentedState":
        if len(z) != STATE_DIM:
            raise ValueError(f"augmented state must have {STATE_DIM} entries, got {len(z)}")
        return cls(
            VehicleState(float(z[0]), float(z[1]), float(z[2]), float(z[3])),
            ActuatorState(float(z[4]), float(z[5])),
        )


@dataclass(frozen=True)
class VehicleGeometry:
    l_f: float = 1.0
    l_r: float = 1.0
    w_f: float = 1.0
    w_r: float = 1.0
    beta_max: float = math.radians(33.0)

    def __post_init__(self):
        if min(self.l_f, self.l_r, self.w_f, self.w_r) <= 0:
            raise ValueError("vehicle lengths and widths must be positive")
        if not 0.0 < self.beta_max < math.pi / 2:
            raise ValueError("beta_max must lie in (0, pi/2)")
        # cos is decreasing on [0, pi/2), so the worst case is |beta| = beta_max
        if self.l_f * math.cos(self.beta_max) + self.l_r <= 0:
            raise ValueError("kinematic singularity inside the articulation range")


@dataclass(frozen=True)
class ActuatorParams:
    k1: float = 4.0
    k2: float = 4.0

    def __post_init__(self):
        if self.k1 <= 0 or self.k2 <= 0:
            raise ValueError("actuator lag gains must be positive")


class AffineActuator(NamedTuple):
    """Actuator model ``u_dot = drift(u, params) + input_matrix(u, params) @ u_cmd``.

    Both callables must accept dual-number arguments so barrier derivatives
    can be propagated through them.
    """

    drift: Callable
    input_matrix: Callable


def _lag_drift(u, params: ActuatorParams):
    return (-params.k1 * u[0], -params.k2 * u[1])


def _lag_input_matrix(u, params: ActuatorParams):
    return ((params.k1, 0.0), (0.0, params.k2))


FIRST_ORDER_LAG = AffineActuator(_lag_drift, _lag_input_matrix)


def _kinematics(theta, beta, v, w, l_f, l_r):
    den = l_f * dual.cos(beta) + l_r
    if dual.primal(den) <= SINGULAR_TOL:
        raise SingularKinematicsError(
            f"l_f*cos(beta) + l_r = {dual.primal(den):.3e} at beta = {dual.primal(beta):.6f}"
        )
    return (
        v * dual.cos(theta),
        v * dual.sin(theta),
        (v * dual.sin(beta) + l_r * w) / den,
        w,
    )


def kinematics_rhs(state: VehicleState, act: ActuatorState, geom: VehicleGeometry) -> np.ndarray:
    """Pose derivative ``(x_f_dot, y_f_dot, theta_f_dot, beta_dot)``."""
    return np.array(
        _kinematics(state.theta_f, state.beta, act.v_f, act.u_betadot, geom.l_f, geom.l_r),
        dtype=float,
    )


def actuator_rhs(act: ActuatorState, cmd: Sequence[float], params: ActuatorParams) -> np.ndarray:
    return np.array(
        [params.k1 * (cmd[0] - act.v_f), params.k2 * (cmd[1] - act.u_betadot)], dtype=float
    )


def drift_field(z, geom: VehicleGeometry, params: ActuatorParams, actuator: AffineActuator = FIRST_ORDER_LAG):
    """``f_z(z)`` as a tuple; works on floats or dual numbers."""
    kin = _kinematics(z[2], z[3], z[4], z[5], geom.l_f, geom.l_r)
    return kin + tuple(actuator.drift((z[4], z[5]), params))


def input_field(z, params: ActuatorParams, actuator: AffineActuator = FIRST_ORDER_LAG):
    """Columns of ``g_z(z)``: two 6-tuples, zero in the pose rows."""
    g = actuator.input_matrix((z[4], z[5]), params)
    return tuple((0.0, 0.0, 0.0, 0.0, g[0][j], g[1][j]) for j in range(2))


def augmented_rhs(
    z: AugmentedState,
    cmd: Sequence[float],
    geom: VehicleGeometry,
    params: ActuatorParams,
    actuator: AffineActuator = FIRST_ORDER_LAG,
) -> np.ndarray:
    arr = z.as_array() if isinstance(z, AugmentedState) else np.asarray(z, dtype=float)
    out = np.array(drift_field(arr, geom, params, actuator), dtype=float)
    for col, c in zip(input_field(arr, params, actuator), cmd):
        out += np.asarray(col, dtype=float) * c
    return out
