"""Randomized self-checks: barrier derivatives vs finite differences, QP vs a
projected-gradient dual oracle."""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import List

import numpy as np

from ._backend import kernels
from .qp import SOLVED, QpProblem, solve

REL_TOL = 1e-5
ABS_TOL = 1e-7
CLAMP_MARGIN = 0.01
H1_FLOOR = 0.05


# --- finite-difference oracle (independent numpy implementation) ---------------

def _h2_batch(P, obs, rs, dmin):
    xo, yo, ro = obs[:, 0], obs[:, 1], obs[:, 2]
    dx = P[:, 0] - xo
    dy = P[:, 1] - yo
    diff = np.arctan2(-dy, -dx) - P[:, 2]
    diff = np.mod(diff + np.pi, 2 * np.pi) - np.pi
    eta = np.clip(diff, -np.pi / 2, np.pi / 2)
    h1 = dx * dx + dy * dy - (ro + rs * np.cos(eta)) ** 2
    with np.errstate(invalid="ignore", divide="ignore"):
        return np.log(h1 / dmin ** 2)  # nan outside the domain


def _rhs_batch(Z, U, lf, lr, k1, k2):
    th, b, v, w = Z[:, 2], Z[:, 3], Z[:, 4], Z[:, 5]
    return np.column_stack([
        v * np.cos(th), v * np.sin(th), (v * np.sin(b) + lr * w) / (lf * np.cos(b) + lr), w,
        k1 * (U[:, 0] - v), k2 * (U[:, 1] - w),
    ])


def _flow_batch(Z, U, T, substeps, params):
    dt = T / substeps
    for _ in range(substeps):
        a = _rhs_batch(Z, U, *params)
        b = _rhs_batch(Z + 0.5 * dt * a, U, *params)
        c = _rhs_batch(Z + 0.5 * dt * b, U, *params)
        d = _rhs_batch(Z + dt * c, U, *params)
        Z = Z + dt / 6.0 * (a + 2 * b + 2 * c + d)
    return Z


def fd_rates(Z, U, obs, rs, dmin, params, eps=2e-3, substeps=8):
    """Richardson-extrapolated first and second central differences of h2 along flows."""
    h0 = _h2_batch(Z, obs, rs, dmin)

    def diffs(e):
        hp = _h2_batch(_flow_batch(Z, U, e, substeps, params), obs, rs, dmin)
        hm = _h2_batch(_flow_batch(Z, U, -e, substeps, params), obs, rs, dmin)
        return (hp - hm) / (2 * e), (hp - 2 * h0 + hm) / (e * e)

    d1a, d2a = diffs(eps)
    d1b, d2b = diffs(eps / 2)
    return (4 * d1b - d1a) / 3, (4 * d2b - d2a) / 3


def _sample_states(rng, n, rs, dmin, beta_max):
    Z, O = [], []
    while len(Z) < n:
        ro = rng.uniform(0.3, 2.0)
        xo, yo = rng.uniform(-5, 5, size=2)
        th = rng.uniform(-np.pi, np.pi) + 2 * np.pi * rng.integers(-2, 3)
        dist = rng.uniform(0.2, 6.0) + ro
        bearing = rng.uniform(-np.pi, np.pi)
        xf, yf = xo - dist * math.cos(bearing), yo - dist * math.sin(bearing)
        diff = (bearing - th + np.pi) % (2 * np.pi) - np.pi
        if abs(abs(diff) - np.pi / 2) < CLAMP_MARGIN:
            continue
        eta = max(-np.pi / 2, min(np.pi / 2, diff))
        h1 = dist ** 2 - (ro + rs * math.cos(eta)) ** 2
        if h1 < H1_FLOOR:
            continue
        Z.append([xf, yf, th, rng.uniform(-beta_max, beta_max), rng.uniform(-1, 1), rng.uniform(-0.4, 0.4)])
        O.append([xo, yo, ro])
    return np.array(Z), np.array(O)


@dataclass
class DerivativeReport:
    trials: int
    max_err_hdot: float
    max_err_drift: float
    max_err_cmd: float
    failures: int
    runtime_s: float
    backend: str = kernels.BACKEND

    @property
    def passed(self) -> bool:
        return self.failures == 0


def _err(est, ref):
    """Scaled error: <= 1 means within the relative or the absolute tolerance."""
    return np.minimum(np.abs(est - ref) / np.maximum(REL_TOL * np.abs(ref), 1e-300),
                      np.abs(est - ref) / ABS_TOL)


def derivative_suite(seed: int = 0, trials: int = 1000, rs=math.sqrt(2.0), dmin=0.5,
                     lf=1.0, lr=1.0, k1=4.0, k2=4.0, beta_max=math.radians(33.0)) -> DerivativeReport:
    """Compare kernel Lie derivatives of h2 against finite differences."""
    t0 = time.perf_counter()
    rng = np.random.default_rng(seed)
    Z, O = _sample_states(rng, trials, rs, dmin, beta_max)
    K = np.array([kernels.barrier_chain(z, o[0], o[1], o[2], rs, dmin, lf, lr, k1, k2)[3:7]
                  for z, o in zip(Z, O)])
    params = (lf, lr, k1, k2)
    zero = np.zeros((trials, 2))
    d1, d2_drift = fd_rates(Z, zero, O, rs, dmin, params)
    # a random command exercises drift + both command coefficients together
    Ucmd = np.column_stack([rng.uniform(-1, 1, trials), rng.uniform(-0.4, 0.4, trials)])
    _, d2_cmd = fd_rates(Z, Ucmd, O, rs, dmin, params)
    e1 = _err(K[:, 0], d1)
    e2 = _err(K[:, 1], d2_drift)
    e3 = _err(K[:, 1] + K[:, 2] * Ucmd[:, 0] + K[:, 3] * Ucmd[:, 1], d2_cmd)
    fails = int(np.sum((e1 > 1) | (e2 > 1) | (e3 > 1)))
    return DerivativeReport(trials, float(e1.max()), float(e2.max()), float(e3.max()), fails,
                            time.perf_counter() - t0)


# --- QP oracle -------------------------------------------------------------------

def random_qp(rng, n=None, m=None) -> QpProblem:
    """Strictly convex QP with a nonempty, bounded feasible set."""
    n = int(rng.integers(1, 9)) if n is None else n
    m = int(rng.integers(0, 9)) if m is None else m
    Q, _ = np.linalg.qr(rng.standard_normal((n, n)))
    H = Q @ np.diag(rng.uniform(0.5, 5.0, n)) @ Q.T
    H = 0.5 * (H + H.T)
    f = rng.standard_normal(n) * 3
    A = rng.standard_normal((m, n))
    x_feas = rng.uniform(-1, 1, n)
    b = A @ x_feas + rng.uniform(0.0, 1.0, m) * (rng.random(m) < 0.7)
    lb = np.full(n, -3.0)
    ub = np.full(n, 3.0)
    return QpProblem(H, f, A, b, lb, ub)


def _stack(qp: QpProblem):
    rows = [qp.A, np.eye(qp.n), -np.eye(qp.n)]
    rhs = [qp.b, qp.ub, -qp.lb]
    return np.vstack(rows), np.concatenate(rhs)


def dual_projected_gradient(qps: List[QpProblem], iters: int = 10000):
    """Batched accelerated projected gradient on the dual of each QP.

    Returns the dual objective values (lower bounds on the optimum) and the
    primal points ``x(lambda)``.
    """
    N = len(qps)
    n = max(q.n for q in qps)
    k = max(q.m + 2 * q.n for q in qps)
    Hinv = np.zeros((N, n, n))
    C = np.zeros((N, k, n))
    d = np.zeros((N, k))
    f = np.zeros((N, n))
    mask = np.zeros((N, k))
    for i, q in enumerate(qps):
        Ci, di = _stack(q)
        Hinv[i, :q.n, :q.n] = np.linalg.inv(q.H)
        C[i, :Ci.shape[0], :q.n] = Ci
        d[i, :Ci.shape[0]] = di
        f[i, :q.n] = q.f
        mask[i, :Ci.shape[0]] = 1.0
    M = np.einsum("ikn,inm,ijm->ikj", C, Hinv, C)
    c = d + np.einsum("ikn,inm,im->ik", C, Hinv, f)
    L = np.linalg.eigvalsh(M)[:, -1][:, None] + 1e-12
    lam = np.zeros((N, k))
    y = lam.copy()
    tk = np.ones((N, 1))

    def dual_obj(l):
        return 0.5 * np.einsum("ik,ikj,ij->i", l, M, l) + np.einsum("ik,ik->i", c, l)

    prev = dual_obj(lam)
    for _ in range(iters):
        g = np.einsum("ikj,ij->ik", M, y) + c
        new = np.maximum(y - g / L, 0.0) * mask
        tn = 0.5 * (1 + np.sqrt(1 + 4 * tk * tk))
        val = dual_obj(new)
        restart = (val > prev)[:, None]
        y = np.where(restart, new, new + ((tk - 1) / tn) * (new - lam))
        tk = np.where(restart, 1.0, tn)
        lam, prev = new, val
    x = -np.einsum("inm,im->in", Hinv, f + np.einsum("ikn,ik->in", C, lam))
    const = 0.5 * np.einsum("in,inm,im->i", f, Hinv, f)
    return -dual_obj(lam) - const, x


@dataclass
class QpReport:
    trials: int
    rows: list = field(default_factory=list)
    max_gap: float = 0.0
    max_kkt: float = 0.0
    nondeterministic: int = 0
    unsolved: int = 0
    runtime_s: float = 0.0

    @property
    def passed(self) -> bool:
        return self.max_gap <= 1e-6 and self.max_kkt <= 1e-6 and not self.nondeterministic and not self.unsolved


def qp_selftest(seed: int = 0, trials: int = 100) -> QpReport:
    t0 = time.perf_counter()
    rng = np.random.default_rng(seed)
    qps = [random_qp(rng) for _ in range(trials)]
    lower, _ = dual_projected_gradient(qps)
    rep = QpReport(trials)
    for i, q in enumerate(qps):
        s1 = solve(q)
        s2 = solve(q)
        same = s1.x.tobytes() == s2.x.tobytes()
        obj = q.objective(s1.x)
        gap = abs(obj - lower[i])
        rep.rows.append({"id": i, "n": q.n, "m": q.m, "status": s1.status, "objective": obj,
                         "oracle": float(lower[i]), "gap": gap, "kkt": s1.kkt_residual,
                         "deterministic": same})
        rep.max_gap = max(rep.max_gap, gap)
        rep.max_kkt = max(rep.max_kkt, s1.kkt_residual)
        rep.nondeterministic += not same
        rep.unsolved += s1.status != SOLVED
    rep.runtime_s = time.perf_counter() - t0
    return rep
