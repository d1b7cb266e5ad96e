"""Per-step safety-filter QP.

Decision vector: ``[v_cmd, bdot_cmd] ++ [(nu1_j, delta1_j, p2_j) for j in obstacles]``.
Cost: ``1/2 R (u - u_N)^2 + sum_j W1 nu1_j + P1 delta1_j^2 + Q (p2_j - p2*)^2``
with constant terms dropped.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np

from . import barrier as bar
from .barrier import BarrierEvaluation, BarrierParams, Obstacle, PacbfState
from .qp import SOLVED, QpProblem, QpSolution, regularize, solve
from .vehicle import ActuatorParams, AugmentedState, VehicleGeometry

EPS_REG = 1e-8


@dataclass(frozen=True)
class FilterWeights:
    R1: float = 1.0
    R2: float = 1.0
    W1: float = 1.0
    P1: float = 100.0
    Q: float = 100.0
    p1_star: float = 0.5
    p2_star: float = 1.0
    eps: float = 1.0

    def __post_init__(self):
        if min(self.R1, self.R2, self.P1, self.Q) <= 0:
            raise ValueError("R1, R2, P1 and Q must be positive")
        if min(self.W1, self.p1_star, self.p2_star, self.eps) < 0:
            raise ValueError("W1, p1_star, p2_star and eps must be nonnegative")


@dataclass(frozen=True)
class InputBounds:
    v_min: float = -1.0
    v_max: float = 1.0
    betadot_min: float = -math.radians(23.0)
    betadot_max: float = math.radians(23.0)

    def __post_init__(self):
        if not (self.v_min < self.v_max and self.betadot_min < self.betadot_max):
            raise ValueError("input bounds must satisfy min < max")


@dataclass
class FilterStepResult:
    u_cmd: np.ndarray
    nu1: np.ndarray
    delta1: np.ndarray
    p2: np.ndarray
    qp_status: str
    kkt_residual: float
    active_constraint_ids: tuple
    psi: np.ndarray  # (M, 3): psi0, psi1, psi2 at the returned decision
    evaluations: List[BarrierEvaluation] = field(default_factory=list)
    solution: Optional[QpSolution] = None


def block_slice(j: int) -> slice:
    """Decision indices ``(nu1, delta1, p2)`` of obstacle ``j``."""
    return slice(2 + 3 * j, 5 + 3 * j)


def evaluate_barriers(z, pacbf, obstacles, bp, geom, ap) -> List[BarrierEvaluation]:
    return [bar.barrier_chain(z, p, o, bp, geom, ap) for p, o in zip(pacbf, obstacles)]


def assemble_qp(
    z: AugmentedState,
    pacbf: Sequence[PacbfState],
    obstacles: Sequence[Obstacle],
    u_N,
    w: FilterWeights,
    ib: InputBounds,
    bp: BarrierParams,
    geom: VehicleGeometry,
    ap: ActuatorParams,
    evaluations: Optional[Sequence[BarrierEvaluation]] = None,
) -> QpProblem:
    if len(pacbf) != len(obstacles):
        raise ValueError("one PacbfState per obstacle is required")
    if evaluations is None:
        evaluations = evaluate_barriers(z, pacbf, obstacles, bp, geom, ap)
    M = len(obstacles)
    n = 2 + 3 * M
    H = np.zeros((n, n))
    f = np.zeros(n)
    H[0, 0], H[1, 1] = w.R1, w.R2
    f[0], f[1] = -w.R1 * u_N[0], -w.R2 * u_N[1]
    lb = np.full(n, -np.inf)
    ub = np.full(n, np.inf)
    lb[0], ub[0] = ib.v_min, ib.v_max
    lb[1], ub[1] = ib.betadot_min, ib.betadot_max
    A = np.zeros((3 * M, n))
    b = np.zeros(3 * M)
    for j, (ev, p1) in enumerate(zip(evaluations, pacbf)):
        s = block_slice(j)
        iv, idl, ip = s.start, s.start + 1, s.start + 2
        H[idl, idl] = 2.0 * w.P1
        H[ip, ip] = 2.0 * w.Q
        f[iv] = w.W1
        f[ip] = -2.0 * w.Q * w.p2_star
        lb[ip] = 0.0
        for r, (a5, rhs) in enumerate((
            bar.pacbf_constraint_row(ev, p1),
            bar.nu_positivity_row(p1),
            bar.clf_row(p1, w.p1_star, w.eps),
        )):
            row = A[3 * j + r]
            row[0:2] = a5[0:2]
            row[s] = a5[2:5]
            b[3 * j + r] = rhs
    return QpProblem(H, f, A, b, lb, ub)


def filter_step(
    z,
    pacbf: Sequence[PacbfState],
    obstacles: Sequence[Obstacle],
    u_N,
    w: FilterWeights,
    ib: InputBounds,
    bp: BarrierParams,
    geom: VehicleGeometry,
    ap: ActuatorParams,
    warm_start: Optional[QpSolution] = None,
) -> FilterStepResult:
    """Solve the regularized filter QP for one control period."""
    evs = evaluate_barriers(z, pacbf, obstacles, bp, geom, ap)
    qp = regularize(assemble_qp(z, pacbf, obstacles, u_N, w, ib, bp, geom, ap, evs), EPS_REG)
    sol = solve(qp, warm_start=warm_start)
    M = len(obstacles)
    x = sol.x
    u_cmd = x[:2].copy()
    nu1 = np.array([x[block_slice(j)][0] for j in range(M)])
    delta1 = np.array([x[block_slice(j)][1] for j in range(M)])
    p2 = np.array([x[block_slice(j)][2] for j in range(M)])
    psi = np.full((M, 3), np.nan)
    for j, ev in enumerate(evs):
        psi[j, 0] = ev.h2
        psi[j, 1] = ev.psi1
        if sol.status == SOLVED:
            psi[j, 2] = bar.psi2_value(ev, pacbf[j], u_cmd, nu1[j], p2[j])
    return FilterStepResult(
        u_cmd=u_cmd, nu1=nu1, delta1=delta1, p2=p2, qp_status=sol.status,
        kkt_residual=sol.kkt_residual, active_constraint_ids=sol.active_set, psi=psi,
        evaluations=evs, solution=sol,
    )
