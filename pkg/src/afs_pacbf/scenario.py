"""Closed-loop simulation: nominal law, safety filter, RK4 under zero-order hold."""

from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np

from . import barrier as bar
from ._backend import kernels
from .barrier import PacbfState
from .config import ScenarioConfig
from .errors import BarrierDomainError, CoincidentPointError, SingularKinematicsError
from .nominal import nominal_input
from .qp import SOLVED
from .safety_filter import evaluate_barriers, filter_step
from .vehicle import ActuatorParams, AugmentedState, VehicleGeometry

log = logging.getLogger(__name__)

OBSTACLE_FIELDS = ("h0", "h1", "h2", "psi1", "psi2", "p1", "nu1", "delta1", "p2")
P1_FLOOR_ANOMALY = 1e-9


@dataclass
class ObstacleRecord:
    h0: float
    h1: float
    h2: float
    psi1: float
    psi2: float
    p1: float
    nu1: float
    delta1: float
    p2: float
    eta: float
    clamp_flag: bool


@dataclass
class TrajectoryRecord:
    t: float
    z: np.ndarray
    u_N: Tuple[float, float]
    u_cmd: Tuple[float, float]
    obstacles: List[ObstacleRecord]
    qp_status: str
    kkt_residual: float


@dataclass
class RunSummary:
    goal_reached: bool = False
    goal_time: Optional[float] = None
    min_h2: List[float] = field(default_factory=list)
    min_psi1: List[float] = field(default_factory=list)
    min_psi2: List[float] = field(default_factory=list)
    infeasible_steps: int = 0
    clamp_flags: int = 0
    max_abs_beta: float = 0.0
    beta_limit_violations: int = 0
    p1_floor_anomalies: int = 0
    safety_violation: bool = False
    filter_enabled: bool = True
    steps: int = 0
    wall_clock_s: float = 0.0
    backend: str = kernels.BACKEND


def rk4_step(z, u_cmd, dt: float, geom: VehicleGeometry, ap: ActuatorParams) -> np.ndarray:
    """One classical RK4 step of the augmented dynamics with the command held constant."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    arr = z.as_array() if isinstance(z, AugmentedState) else z
    return np.array(kernels.rk4_step(arr, u_cmd, dt, geom.l_f, geom.l_r, ap.k1, ap.k2))


def summarize(records: List[TrajectoryRecord], cfg: ScenarioConfig, **flags) -> RunSummary:
    """Recompute the run summary from the log (plus flags not visible in it)."""
    M = len(cfg.obstacles)
    s = RunSummary(filter_enabled=cfg.filter_enabled, steps=len(records), **flags)

    def col(j, name):
        return np.array([getattr(r.obstacles[j], name) for r in records], dtype=float)

    for j in range(M):
        for name, out in (("h2", s.min_h2), ("psi1", s.min_psi1), ("psi2", s.min_psi2)):
            v = col(j, name) if records else np.array([])
            v = v[~np.isnan(v)]
            out.append(float(v.min()) if v.size else math.nan)
    s.infeasible_steps = sum(r.qp_status not in (SOLVED, "disabled") for r in records)
    s.clamp_flags = sum(o.clamp_flag for r in records for o in r.obstacles)
    if records:
        betas = np.abs([r.z[3] for r in records])
        s.max_abs_beta = float(betas.max())
        s.beta_limit_violations = int(np.sum(betas > cfg.geometry.beta_max))
    return s


def run_scenario(cfg: ScenarioConfig) -> Tuple[List[TrajectoryRecord], RunSummary]:
    """Simulate ``cfg`` until the goal, ``t_max`` or a barrier domain failure."""
    t0 = time.perf_counter()
    geom, ap, bp = cfg.geometry, cfg.actuator, cfg.barrier
    obstacles = list(cfg.obstacles)
    M = len(obstacles)
    pacbf = [PacbfState(cfg.initial_p1) for _ in obstacles]
    z = cfg.start.as_array()
    records: List[TrajectoryRecord] = []
    goal = cfg.goal
    last_u = np.zeros(2)
    warm = None
    goal_reached, goal_time, safety_violation, anomalies = False, None, False, 0
    n_steps = int(math.floor(cfg.t_max / cfg.dt + 1e-9))

    for k in range(n_steps + 1):
        t = k * cfg.dt
        if math.hypot(z[0] - goal[0], z[1] - goal[1]) <= cfg.goal_tolerance:
            goal_reached, goal_time = True, t
            break
        zs = AugmentedState.from_array(z)
        try:
            u_N = nominal_input(zs.vehicle, cfg.nominal, geom, measured_speed=z[4])
            if cfg.filter_enabled:
                res = filter_step(zs, pacbf, obstacles, u_N, cfg.weights, cfg.bounds, bp, geom, ap,
                                  warm_start=warm)
                evs = res.evaluations
            else:
                evs = evaluate_barriers(zs, pacbf, obstacles, bp, geom, ap)
                res = None
        except BarrierDomainError as exc:
            log.warning("t=%.3f: %s", t, exc)
            safety_violation = True
            break
        except (CoincidentPointError, SingularKinematicsError) as exc:
            log.warning("t=%.3f: %s", t, exc)
            safety_violation = True
            break

        if res is None:
            u_cmd = np.array(u_N, dtype=float)
            status, kkt = "disabled", math.nan
            per = [ObstacleRecord(ev.h0, ev.h1, ev.h2, ev.psi1, math.nan, pacbf[j].p1,
                                  math.nan, math.nan, math.nan, ev.eta, ev.clamp_flag)
                   for j, ev in enumerate(evs)]
        else:
            status, kkt = res.qp_status, res.kkt_residual
            if status == SOLVED:
                u_cmd = res.u_cmd
                last_u = u_cmd
                warm = res.solution
            else:
                log.warning("t=%.3f: QP %s, holding previous command", t, status)
                u_cmd = last_u
                warm = None
            per = [ObstacleRecord(ev.h0, ev.h1, ev.h2, ev.psi1, res.psi[j, 2], pacbf[j].p1,
                                  res.nu1[j], res.delta1[j], res.p2[j], ev.eta, ev.clamp_flag)
                   for j, ev in enumerate(evs)]
        records.append(TrajectoryRecord(t, z.copy(), (float(u_N[0]), float(u_N[1])),
                                        (float(u_cmd[0]), float(u_cmd[1])), per, status, kkt))

        if res is not None and status == SOLVED:
            for j in range(M):
                if bar.integrate_penalty(pacbf[j], float(res.nu1[j]), cfg.dt) > P1_FLOOR_ANOMALY:
                    anomalies += 1
        try:
            z = rk4_step(z, u_cmd, cfg.dt, geom, ap)
        except SingularKinematicsError as exc:
            log.warning("t=%.3f: %s", t, exc)
            safety_violation = True
            break

    summary = summarize(records, cfg, goal_reached=goal_reached, goal_time=goal_time,
                        safety_violation=safety_violation, p1_floor_anomalies=anomalies)
    summary.wall_clock_s = time.perf_counter() - t0
    return records, summary
