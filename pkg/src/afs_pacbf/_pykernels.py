"""Pure-Python kernels.

Same call signatures as the compiled ``_ckernels`` module.  Barrier
derivatives here are taken with nested :class:`~afs_pacbf.dual.Dual` numbers;
the compiled module uses a flat hyper-dual struct, and the two are
cross-checked in the test suite.
"""

from __future__ import annotations

import math

from . import dual
from .dual import Dual
from .errors import BarrierDomainError, CoincidentPointError, SingularKinematicsError

BACKEND = "python"

HALF_PI = 0.5 * math.pi
TWO_PI = 2.0 * math.pi
CLAMP_FLAG_TOL = 1e-6
COINCIDENT_TOL = 1e-9
SINGULAR_TOL = 1e-9


def wrap_to_pi(a):
    """Shift ``a`` by a multiple of 2*pi into (-pi, pi]."""
    return a - TWO_PI * math.ceil((dual.primal(a) - math.pi) / TWO_PI)


def h_terms(xf, yf, thf, xo, yo, ro, rs, dmin):
    """Return ``(h0, h1, h2, eta, clamp_flag)``; inputs may be dual numbers."""
    dx = xf - xo
    dy = yf - yo
    d2 = dx * dx + dy * dy
    if dual.primal(d2) <= COINCIDENT_TOL * COINCIDENT_TOL:
        raise CoincidentPointError("vehicle front point coincides with obstacle center")
    diff = wrap_to_pi(dual.atan2(-dy, -dx) - thf)
    pd = dual.primal(diff)
    flag = abs(abs(pd) - HALF_PI) <= CLAMP_FLAG_TOL
    # ties go to the clamped branch
    if pd >= HALF_PI:
        eta, c = HALF_PI, 0.0
    elif pd <= -HALF_PI:
        eta, c = -HALF_PI, 0.0
    else:
        eta, c = diff, dual.cos(diff)
    h0 = d2 - ro * ro
    r = ro + rs * c
    h1 = d2 - r * r
    if dual.primal(h1) <= 0.0:
        raise BarrierDomainError(f"h1 = {dual.primal(h1):.6g} <= 0 (inside expanded unsafe region)")
    h2 = dual.log(h1 / (dmin * dmin))
    return h0, h1, h2, eta, flag


def _kin(th, beta, v, w, lf, lr):
    den = lf * dual.cos(beta) + lr
    if dual.primal(den) <= SINGULAR_TOL:
        raise SingularKinematicsError(f"l_f*cos(beta) + l_r = {dual.primal(den):.3e}")
    return (v * dual.cos(th), v * dual.sin(th), (v * dual.sin(beta) + lr * w) / den, w)


def augmented_rhs(z, cmd, lf, lr, k1, k2):
    kin = _kin(z[2], z[3], z[4], z[5], lf, lr)
    return [kin[0], kin[1], kin[2], kin[3], k1 * (cmd[0] - z[4]), k2 * (cmd[1] - z[5])]


def rk4_step(z, cmd, dt, lf, lr, k1, k2):
    z = [float(v) for v in z]
    a = augmented_rhs(z, cmd, lf, lr, k1, k2)
    b = augmented_rhs([z[i] + 0.5 * dt * a[i] for i in range(6)], cmd, lf, lr, k1, k2)
    c = augmented_rhs([z[i] + 0.5 * dt * b[i] for i in range(6)], cmd, lf, lr, k1, k2)
    d = augmented_rhs([z[i] + dt * c[i] for i in range(6)], cmd, lf, lr, k1, k2)
    return [z[i] + dt / 6.0 * (a[i] + 2.0 * b[i] + 2.0 * c[i] + d[i]) for i in range(6)]


def second_directional(h_of_pose, drift, z, direction):
    """``(dh/dt, D(dh/dt)[direction])`` for ``h(pose)`` along ``z_dot = drift(z)``.

    The outer dual level carries ``direction``; the inner level carries the
    drift evaluated at the outer-perturbed point.
    """
    outer = [Dual(float(z[i]), float(direction[i])) for i in range(6)]
    flow = drift(outer)
    inner = [Dual(outer[i], flow[i] if isinstance(flow[i], Dual) else Dual(flow[i], 0.0)) for i in range(3)]
    res = h_of_pose(inner[0], inner[1], inner[2])
    rate = res.eps
    if not isinstance(rate, Dual):
        return float(rate), 0.0
    return float(rate.val), float(rate.eps)


def barrier_chain_generic(z, h_of_pose, drift, input_cols):
    """Lie-derivative data for ``h2`` with arbitrary drift/input fields.

    Returns ``(h2_dot, lf2_h2, lglf_h2)``.
    """
    f0 = [dual.primal(v) for v in drift(list(z))]
    h2_dot, lf2 = second_directional(h_of_pose, drift, z, f0)
    lglf = [second_directional(h_of_pose, drift, z, col)[1] for col in input_cols]
    return h2_dot, lf2, lglf


def barrier_chain(z, xo, yo, ro, rs, dmin, lf, lr, k1, k2):
    """Return ``(h0, h1, h2, h2_dot, lf2_h2, lglf_v, lglf_w, eta, clamp_flag)``."""
    h0, h1, h2, eta, flag = h_terms(z[0], z[1], z[2], xo, yo, ro, rs, dmin)

    def h_of_pose(x, y, th):
        return h_terms(x, y, th, xo, yo, ro, rs, dmin)[2]

    def drift(w):
        kin = _kin(w[2], w[3], w[4], w[5], lf, lr)
        return [kin[0], kin[1], kin[2], kin[3], -k1 * w[4], -k2 * w[5]]

    cols = ((0.0, 0.0, 0.0, 0.0, k1, 0.0), (0.0, 0.0, 0.0, 0.0, 0.0, k2))
    h2_dot, lf2, lglf = barrier_chain_generic(z, h_of_pose, drift, cols)
    return h0, h1, h2, h2_dot, lf2, lglf[0], lglf[1], float(eta), flag
