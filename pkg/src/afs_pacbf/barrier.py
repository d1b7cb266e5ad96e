"""Barrier candidates h0/h1/h2 and the relative-degree-two adaptive chain.

For each circular obstacle the QP receives three rows over the per-obstacle
decision block ``(u_cmd[0], u_cmd[1], nu1, delta1, p2)``:

* chain row:   psi2 = Lf^2 h2 + LgLf h2 . u_cmd + h2^2 nu1 + 2 p1 h2 h2_dot + p2 psi1 >= 0
* positivity:  p1 + nu1 >= 0
* soft CLF:    2 (p1 - p1*) nu1 + eps (p1 - p1*)^2 <= delta1
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import _pykernels
from ._backend import kernels
from .errors import CoincidentPointError
from .vehicle import (
    FIRST_ORDER_LAG,
    ActuatorParams,
    AffineActuator,
    AugmentedState,
    VehicleGeometry,
    VehicleState,
    drift_field,
    input_field,
)

HALF_PI = 0.5 * math.pi


@dataclass(frozen=True)
class Obstacle:
    x_o: float
    y_o: float
    R_o: float

    def __post_init__(self):
        if self.R_o <= 0:
            raise ValueError("obstacle radius must be positive")


@dataclass(frozen=True)
class BarrierParams:
    r_s: float = math.sqrt(2.0)
    d_min: float = 0.5

    def __post_init__(self):
        if self.r_s <= 0 or self.d_min <= 0:
            raise ValueError("r_s and d_min must be positive")


@dataclass
class PacbfState:
    p1: float = 0.5


@dataclass(frozen=True)
class BarrierEvaluation:
    h0: float
    h1: float
    h2: float
    h2_dot: float
    lf2_h2: float
    lglf_h2: tuple
    psi1: float
    eta: float
    clamp_flag: bool


def eta(state: VehicleState, obs: Obstacle) -> float:
    """Relative bearing of the obstacle, wrapped to (-pi, pi] then clamped to +-pi/2."""
    dx = obs.x_o - state.x_f
    dy = obs.y_o - state.y_f
    if math.hypot(dx, dy) <= 1e-9:
        raise CoincidentPointError("vehicle front point coincides with obstacle center")
    diff = _pykernels.wrap_to_pi(math.atan2(dy, dx) - state.theta_f)
    return min(HALF_PI, max(-HALF_PI, diff))


def h_values(state: VehicleState, obs: Obstacle, bp: BarrierParams):
    """``(h0, h1, h2)``; raises :class:`BarrierDomainError` when ``h1 <= 0``."""
    h0, h1, h2, _, _ = _pykernels.h_terms(
        state.x_f, state.y_f, state.theta_f, obs.x_o, obs.y_o, obs.R_o, bp.r_s, bp.d_min
    )
    return h0, h1, h2


def barrier_chain(
    z: AugmentedState,
    p1: PacbfState,
    obs: Obstacle,
    bp: BarrierParams,
    geom: VehicleGeometry,
    ap: ActuatorParams,
    actuator: Optional[AffineActuator] = None,
) -> BarrierEvaluation:
    """Evaluate h2 and its Lie derivatives along the augmented dynamics.

    The default first-order lag actuator goes through the selected kernel
    backend; any other ``actuator`` uses the generic nested-dual path.
    """
    arr = z.as_array() if isinstance(z, AugmentedState) else np.asarray(z, dtype=float)
    if actuator is None or actuator is FIRST_ORDER_LAG:
        h0, h1, h2, h2d, lf2, gv, gw, et, flag = kernels.barrier_chain(
            arr, obs.x_o, obs.y_o, obs.R_o, bp.r_s, bp.d_min, geom.l_f, geom.l_r, ap.k1, ap.k2
        )
        lglf = (gv, gw)
    else:
        h0, h1, h2, et, flag = _pykernels.h_terms(
            arr[0], arr[1], arr[2], obs.x_o, obs.y_o, obs.R_o, bp.r_s, bp.d_min
        )

        def h_of_pose(x, y, th):
            return _pykernels.h_terms(x, y, th, obs.x_o, obs.y_o, obs.R_o, bp.r_s, bp.d_min)[2]

        def drift(w):
            return drift_field(w, geom, ap, actuator)

        cols = input_field(arr, ap, actuator)
        h2d, lf2, lglf = _pykernels.barrier_chain_generic(arr, h_of_pose, drift, cols)
        lglf = tuple(lglf)
        et = float(et)
    p = p1.p1 if isinstance(p1, PacbfState) else float(p1)
    return BarrierEvaluation(
        h0=h0, h1=h1, h2=h2, h2_dot=h2d, lf2_h2=lf2, lglf_h2=lglf,
        psi1=h2d + p * h2 * h2, eta=et, clamp_flag=bool(flag),
    )


def _p1(p1) -> float:
    return p1.p1 if isinstance(p1, PacbfState) else float(p1)


def pacbf_constraint_row(ev: BarrierEvaluation, p1: PacbfState):
    """Chain row ``a . (v_cmd, bdot_cmd, nu1, delta1, p2) <= b`` encoding psi2 >= 0."""
    p = _p1(p1)
    a = -np.array([ev.lglf_h2[0], ev.lglf_h2[1], ev.h2 * ev.h2, 0.0, ev.psi1])
    b = ev.lf2_h2 + 2.0 * p * ev.h2 * ev.h2_dot
    return a, b


def nu_positivity_row(p1: PacbfState):
    # -nu1 <= p1
    return np.array([0.0, 0.0, -1.0, 0.0, 0.0]), _p1(p1)


def clf_row(p1: PacbfState, p1_star: float, eps: float):
    if eps < 0:
        raise ValueError("CLF rate must be nonnegative")
    e = _p1(p1) - p1_star
    return np.array([0.0, 0.0, 2.0 * e, -1.0, 0.0]), -eps * e * e


def psi2_value(ev: BarrierEvaluation, p1: PacbfState, u_cmd, nu1: float, p2: float) -> float:
    """psi2 evaluated directly from its definition at given decision values."""
    p = _p1(p1)
    h2_ddot = ev.lf2_h2 + ev.lglf_h2[0] * u_cmd[0] + ev.lglf_h2[1] * u_cmd[1]
    psi1_dot = h2_ddot + nu1 * ev.h2 * ev.h2 + 2.0 * p * ev.h2 * ev.h2_dot
    return psi1_dot + p2 * ev.psi1


def integrate_penalty(p1: PacbfState, nu1: float, dt: float) -> float:
    """Euler step of ``p1_dot = nu1`` floored at zero; returns the amount floored."""
    nxt = p1.p1 + dt * nu1
    floored = 0.0
    if nxt < 0.0:
        floored = -nxt
        nxt = 0.0
    p1.p1 = nxt
    return floored
