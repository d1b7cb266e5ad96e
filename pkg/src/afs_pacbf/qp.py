"""Dense convex QP solver for small problems.

    minimize    1/2 x'Hx + f'x
    subject to  A x <= b,  lb <= x <= ub

Primal active-set method in elastic mode: an auxiliary variable ``t >= 0``
relaxes every general row (``A x - t <= b``) and is charged ``M t``, so any
box-feasible point is a valid start.  When the elastic optimum has ``t = 0``
it solves the original problem; otherwise ``M`` is raised or a Farkas
certificate ``y >= 0, C'y = 0, d'y = -1`` is produced for the stacked rows
``C x <= d``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
import scipy.linalg as sla
from scipy.optimize import nnls

from .errors import DimensionError, NotPsdError

SOLVED = "solved"
INFEASIBLE = "infeasible"
MAX_ITERATIONS = "max_iterations"

_PSD_PROBE = 1e-8
_ELASTIC_WEIGHTS = (1e4, 1e7, 1e10)
_ELASTIC_CURVATURE = 1.0


@dataclass
class QpProblem:
    H: np.ndarray
    f: np.ndarray
    A: np.ndarray = None
    b: np.ndarray = None
    lb: np.ndarray = None
    ub: np.ndarray = None

    def __post_init__(self):
        self.H = np.atleast_2d(np.asarray(self.H, dtype=float))
        self.f = np.asarray(self.f, dtype=float).reshape(-1)
        n = self.f.size
        if self.H.shape != (n, n):
            raise DimensionError(f"H has shape {self.H.shape}, expected ({n}, {n})")
        if self.A is None or np.size(self.A) == 0:
            self.A = np.zeros((0, n))
        self.A = np.atleast_2d(np.asarray(self.A, dtype=float))
        if self.A.ndim != 2 or self.A.shape[1] != n:
            raise DimensionError(f"A has shape {self.A.shape}, expected (m, {n})")
        self.b = np.zeros(0) if self.b is None else np.asarray(self.b, dtype=float).reshape(-1)
        if self.A.shape[0] != self.b.size:
            raise DimensionError(f"A has {self.A.shape[0]} rows but b has {self.b.size} entries")
        self.lb = np.full(n, -np.inf) if self.lb is None else np.asarray(self.lb, dtype=float).reshape(-1)
        self.ub = np.full(n, np.inf) if self.ub is None else np.asarray(self.ub, dtype=float).reshape(-1)
        if self.lb.size != n or self.ub.size != n:
            raise DimensionError("bound vectors must have length n")
        if not (np.all(np.isfinite(self.H)) and np.all(np.isfinite(self.f))
                and np.all(np.isfinite(self.A)) and np.all(np.isfinite(self.b))):
            raise ValueError("QP data must be finite")
        if np.any(np.isnan(self.lb)) or np.any(np.isnan(self.ub)) or np.any(self.lb > self.ub):
            raise ValueError("bounds must satisfy lb <= ub")
        if np.max(np.abs(self.H - self.H.T), initial=0.0) > 1e-12:
            raise ValueError("H must be symmetric")

    @property
    def n(self) -> int:
        return self.f.size

    @property
    def m(self) -> int:
        return self.b.size

    def objective(self, x) -> float:
        x = np.asarray(x, dtype=float)
        return float(0.5 * x @ self.H @ x + self.f @ x)


@dataclass
class QpSolution:
    x: np.ndarray
    lam: np.ndarray
    mu_lb: np.ndarray
    mu_ub: np.ndarray
    status: str
    kkt_residual: float
    iterations: int = 0
    active_set: tuple = ()
    certificate: Optional[np.ndarray] = field(default=None, repr=False)


def regularize(qp: QpProblem, eps_reg: float) -> QpProblem:
    """Return a copy of ``qp`` with ``H + eps_reg * I``."""
    if eps_reg < 0:
        raise ValueError("eps_reg must be nonnegative")
    return QpProblem(qp.H + eps_reg * np.eye(qp.n), qp.f.copy(), qp.A.copy(), qp.b.copy(),
                     qp.lb.copy(), qp.ub.copy())


def kkt_residual(qp: QpProblem, x, lam, mu_lb, mu_ub) -> float:
    """Max-norm of stationarity, feasibility, complementarity and dual-sign residuals."""
    x = np.asarray(x, dtype=float)
    stat = qp.H @ x + qp.f + qp.A.T @ lam - mu_lb + mu_ub
    res = [np.max(np.abs(stat), initial=0.0)]
    if qp.m:
        r = qp.A @ x - qp.b
        res += [np.max(r, initial=0.0), np.max(np.abs(lam * r)), np.max(-lam, initial=0.0)]
    fl, fu = np.isfinite(qp.lb), np.isfinite(qp.ub)
    res.append(np.max(qp.lb[fl] - x[fl], initial=0.0))
    res.append(np.max(x[fu] - qp.ub[fu], initial=0.0))
    res.append(np.max(np.abs(mu_lb[fl] * (x[fl] - qp.lb[fl])), initial=0.0))
    res.append(np.max(np.abs(mu_ub[fu] * (qp.ub[fu] - x[fu])), initial=0.0))
    res.append(np.max(-mu_lb, initial=0.0))
    res.append(np.max(-mu_ub, initial=0.0))
    if np.any(mu_lb[~fl] != 0) or np.any(mu_ub[~fu] != 0):
        res.append(np.inf)
    return float(max(res))


def _check_psd(H: np.ndarray) -> bool:
    """Raise on a clearly indefinite H; return True if H itself is positive definite."""
    n = H.shape[0]
    try:
        np.linalg.cholesky(H + _PSD_PROBE * np.eye(n))
    except np.linalg.LinAlgError:
        raise NotPsdError("H has an eigenvalue below -1e-8") from None
    try:
        np.linalg.cholesky(H)
        return True
    except np.linalg.LinAlgError:
        return False


class _Rows:
    """Stacked constraints ``C y <= d`` over ``y = (x, t)``."""

    def __init__(self, qp: QpProblem):
        n, m = qp.n, qp.m
        keys, rows, rhs = [], [], []
        for i in range(m):
            keys.append(("a", i))
            rows.append(np.append(qp.A[i], -1.0))
            rhs.append(qp.b[i])
        for j in range(n):
            if np.isfinite(qp.ub[j]):
                r = np.zeros(n + 1)
                r[j] = 1.0
                keys.append(("u", j))
                rows.append(r)
                rhs.append(qp.ub[j])
            if np.isfinite(qp.lb[j]):
                r = np.zeros(n + 1)
                r[j] = -1.0
                keys.append(("l", j))
                rows.append(r)
                rhs.append(-qp.lb[j])
        r = np.zeros(n + 1)
        r[n] = -1.0
        keys.append(("t", 0))
        rows.append(r)
        rhs.append(0.0)
        self.keys = keys
        self.index = {k: i for i, k in enumerate(keys)}
        self.C = np.array(rows).reshape(len(rows), n + 1)
        self.d = np.array(rhs, dtype=float)
        self.t_row = len(keys) - 1


def _eqp(G, g, Aw):
    """Step and multipliers for ``min 1/2 p'Gp + g'p  s.t.  Aw p = 0`` (null-space method)."""
    n = G.shape[0]
    w = Aw.shape[0]
    if w == 0:
        p = -sla.cho_solve(sla.cho_factor(G), g)
        return p, np.zeros(0)
    Q, R = np.linalg.qr(Aw.T, mode="complete")
    Y, Z = Q[:, :w], Q[:, w:]
    if Z.shape[1]:
        Gz = Z.T @ G @ Z
        pz = sla.cho_solve(sla.cho_factor(Gz), -(Z.T @ g))
        p = Z @ pz
    else:
        p = np.zeros(n)
    lam = sla.solve_triangular(R[:w, :w], -(Y.T @ (G @ p + g)), lower=False)
    return p, lam


def _independent(C, rows) -> bool:
    if not rows:
        return True
    M = C[rows]
    return np.linalg.matrix_rank(M, tol=1e-10) == len(rows)


def _active_set_loop(G, c, rows: _Rows, y, W, max_iter):
    C, d = rows.C, rows.d
    it = 0
    at_subproblem_min = False
    while it < max_iter:
        it += 1
        g = G @ y + c
        Aw = C[W] if W else np.zeros((0, y.size))
        p, lam = _eqp(G, g, Aw)
        if at_subproblem_min or np.max(np.abs(p)) <= 1e-13 * (1.0 + np.max(np.abs(y))):
            at_subproblem_min = False
            if not W or np.min(lam) >= -1e-12:
                return y, W, lam, it, True
            W = W[:int(np.argmin(lam))] + W[int(np.argmin(lam)) + 1:]
            continue
        Cp = C @ p
        slack = np.maximum(d - C @ y, 0.0)
        alpha, block = 1.0, -1
        inW = set(W)
        scale = np.max(np.abs(C), axis=1) * np.max(np.abs(p))
        for i in np.nonzero(Cp > 1e-14 * np.maximum(scale, 1e-300))[0]:
            if i in inW:
                continue
            a = slack[i] / Cp[i]
            if a < alpha:
                alpha, block = a, int(i)
        y = y + alpha * p
        if block >= 0:
            W = W + [block]
        else:
            at_subproblem_min = True
    return y, W, None, it, False


def _farkas(rows: _Rows, n: int):
    """Nonnegative ``y`` with ``C'y = 0`` and ``d'y = -1`` over the original rows, or None."""
    C = rows.C[:-1]
    Cx = C[:, :n]
    d = rows.d[:-1]
    if C.shape[0] == 0:
        return None
    M = np.vstack([Cx.T, d[None, :]])
    rhs = np.zeros(n + 1)
    rhs[-1] = -1.0
    y, _ = nnls(M, rhs)
    resid = np.max(np.abs(M @ y - rhs))
    if resid <= 1e-8:
        return y
    return None


def solve(qp: QpProblem, warm_start: Optional[QpSolution] = None, max_iter: int = 500) -> QpSolution:
    """Solve ``qp``; ``warm_start`` is a previous solution of a same-shaped problem."""
    n = qp.n
    pd = _check_psd(qp.H)
    H = qp.H
    if not pd:
        H = H + 1e-12 * max(1.0, float(np.max(np.abs(np.diag(H)), initial=0.0))) * np.eye(n)
    rows = _Rows(qp)
    G = np.zeros((n + 1, n + 1))
    G[:n, :n] = H
    G[n, n] = _ELASTIC_CURVATURE

    x0 = np.zeros(n) if warm_start is None else np.asarray(warm_start.x, dtype=float)
    if x0.size != n:
        x0 = np.zeros(n)
    x0 = np.clip(x0, qp.lb, qp.ub)
    y, W = None, []

    if warm_start is not None and warm_start.active_set:
        # previous working set plus t = 0
        Wp = [rows.index[k] for k in warm_start.active_set if k in rows.index and k[0] != "t"]
        Wp.append(rows.t_row)
        if _independent(rows.C, Wp):
            c0 = np.append(qp.f, _ELASTIC_WEIGHTS[0])
            y0 = np.append(x0, 0.0)
            Aw = rows.C[Wp]
            # project onto the working-set affine space, then take the subproblem step
            try:
                shift = np.linalg.lstsq(Aw, rows.d[Wp] - Aw @ y0, rcond=None)[0]
                yw = y0 + shift
                p, _ = _eqp(G, G @ yw + c0, Aw)
                yw = yw + p
                if np.all(rows.C @ yw - rows.d <= 1e-13 * (1.0 + np.abs(rows.d))):
                    y, W = yw, Wp
            except (np.linalg.LinAlgError, ValueError):
                pass
    if y is None:
        t0 = max(0.0, float(np.max(qp.A @ x0 - qp.b, initial=0.0)))
        y = np.append(x0, t0)
        W = []

    total_it = 0
    status = MAX_ITERATIONS
    lam_w = np.zeros(0)
    certificate = None
    for weight in _ELASTIC_WEIGHTS:
        c = np.append(qp.f, weight)
        y, W, lam_w, it, ok = _active_set_loop(G, c, rows, y, W, max_iter - total_it)
        total_it += it
        if not ok:
            status = MAX_ITERATIONS
            break
        if y[n] <= 1e-12:
            status = SOLVED
            break
        certificate = _farkas(rows, n)
        if certificate is not None:
            status = INFEASIBLE
            break

    x = y[:n].copy()
    lam = np.zeros(qp.m)
    mu_lb = np.zeros(n)
    mu_ub = np.zeros(n)
    if status == SOLVED and lam_w is not None:
        for r, l in zip(W, lam_w):
            kind, j = rows.keys[r]
            if kind == "a":
                lam[j] = l
            elif kind == "u":
                mu_ub[j] = l
            elif kind == "l":
                mu_lb[j] = l
    if status == INFEASIBLE:
        resid = float(np.max(np.abs(np.vstack([rows.C[:-1, :n].T, rows.d[None, :-1]]) @ certificate
                                    - np.append(np.zeros(n), -1.0))))
    else:
        resid = kkt_residual(qp, x, lam, mu_lb, mu_ub)
    return QpSolution(
        x=x, lam=lam, mu_lb=mu_lb, mu_ub=mu_ub, status=status, kkt_residual=resid,
        iterations=total_it,
        active_set=tuple(rows.keys[r] for r in W if rows.keys[r][0] != "t"),
        certificate=certificate,
    )
