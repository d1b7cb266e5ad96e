# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels: hyper-dual barrier chain and RK4 for the lag actuator.

A hyper-dual number ``a + b e1 + c e2 + d e1 e2`` (``e1**2 = e2**2 = 0``)
carries two first-order tangents and their mixed second derivative.
"""

from libc.math cimport sin, cos, log, atan2, ceil, fabs, M_PI

from .errors import BarrierDomainError, CoincidentPointError, SingularKinematicsError

BACKEND = "cython"

cdef double HALF_PI = 0.5 * M_PI
cdef double TWO_PI = 2.0 * M_PI
cdef double CLAMP_FLAG_TOL = 1e-6
cdef double COINCIDENT_TOL = 1e-9
cdef double SINGULAR_TOL = 1e-9


cdef struct HD:
    double a
    double b
    double c
    double d


cdef inline HD hd(double a, double b, double c, double d):
    cdef HD r
    r.a = a
    r.b = b
    r.c = c
    r.d = d
    return r


cdef inline HD hd_add(HD x, HD y):
    return hd(x.a + y.a, x.b + y.b, x.c + y.c, x.d + y.d)


cdef inline HD hd_sub(HD x, HD y):
    return hd(x.a - y.a, x.b - y.b, x.c - y.c, x.d - y.d)


cdef inline HD hd_addc(HD x, double s):
    return hd(x.a + s, x.b, x.c, x.d)


cdef inline HD hd_scale(HD x, double s):
    return hd(x.a * s, x.b * s, x.c * s, x.d * s)


cdef inline HD hd_mul(HD x, HD y):
    return hd(x.a * y.a,
              x.a * y.b + x.b * y.a,
              x.a * y.c + x.c * y.a,
              x.a * y.d + x.b * y.c + x.c * y.b + x.d * y.a)


cdef inline HD hd_chain(HD x, double f0, double f1, double f2):
    # scalar function with value f0, first derivative f1, second derivative f2 at x.a
    return hd(f0, f1 * x.b, f1 * x.c, f1 * x.d + f2 * x.b * x.c)


cdef inline HD hd_inv(HD x):
    cdef double r = 1.0 / x.a
    return hd_chain(x, r, -r * r, 2.0 * r * r * r)


cdef inline HD hd_div(HD x, HD y):
    return hd_mul(x, hd_inv(y))


cdef inline HD hd_sin(HD x):
    cdef double s = sin(x.a)
    return hd_chain(x, s, cos(x.a), -s)


cdef inline HD hd_cos(HD x):
    cdef double c = cos(x.a)
    return hd_chain(x, c, -sin(x.a), -c)


cdef inline HD hd_log(HD x):
    cdef double r = 1.0 / x.a
    return hd_chain(x, log(x.a), r, -r * r)


cdef inline HD hd_atan2(HD y, HD x):
    # rotate (x, y) by -atan2(y.a, x.a); the rotated angle is atan(q) with q.a = 0,
    # where atan'(0) = 1 and atan''(0) = 0
    cdef double t0 = atan2(y.a, x.a)
    cdef HD num = hd_sub(hd_scale(y, x.a), hd_scale(x, y.a))
    cdef HD den = hd_add(hd_scale(x, x.a), hd_scale(y, y.a))
    cdef HD q = hd_div(num, den)
    return hd(t0, q.b, q.c, q.d)


cdef inline double wrap_to_pi(double a):
    return a - TWO_PI * ceil((a - M_PI) / TWO_PI)


cdef struct HTerms:
    double h0
    double h1
    HD h2
    double eta
    int flag
    int status  # 0 ok, 1 coincident, 2 domain


cdef HTerms h_terms(HD xf, HD yf, HD thf, double xo, double yo, double ro, double rs, double dmin):
    cdef HTerms out
    cdef HD dx = hd_addc(xf, -xo)
    cdef HD dy = hd_addc(yf, -yo)
    cdef HD d2 = hd_add(hd_mul(dx, dx), hd_mul(dy, dy))
    cdef HD diff, c, r, h1
    cdef double pd
    out.status = 0
    out.flag = 0
    if d2.a <= COINCIDENT_TOL * COINCIDENT_TOL:
        out.status = 1
        return out
    diff = hd_sub(hd_atan2(hd_scale(dy, -1.0), hd_scale(dx, -1.0)), thf)
    diff.a = wrap_to_pi(diff.a)
    pd = diff.a
    if fabs(fabs(pd) - HALF_PI) <= CLAMP_FLAG_TOL:
        out.flag = 1
    if pd >= HALF_PI:
        out.eta = HALF_PI
        c = hd(0.0, 0.0, 0.0, 0.0)
    elif pd <= -HALF_PI:
        out.eta = -HALF_PI
        c = hd(0.0, 0.0, 0.0, 0.0)
    else:
        out.eta = pd
        c = hd_cos(diff)
    out.h0 = d2.a - ro * ro
    r = hd_addc(hd_scale(c, rs), ro)
    h1 = hd_sub(d2, hd_mul(r, r))
    out.h1 = h1.a
    if h1.a <= 0.0:
        out.status = 2
        return out
    out.h2 = hd_log(hd_scale(h1, 1.0 / (dmin * dmin)))
    return out


cdef int drift(HD* z, HD* f, double lf, double lr, double k1, double k2):
    cdef HD den = hd_addc(hd_scale(hd_cos(z[3]), lf), lr)
    if den.a <= SINGULAR_TOL:
        return 1
    f[0] = hd_mul(z[4], hd_cos(z[2]))
    f[1] = hd_mul(z[4], hd_sin(z[2]))
    f[2] = hd_div(hd_add(hd_mul(z[4], hd_sin(z[3])), hd_scale(z[5], lr)), den)
    f[3] = z[5]
    f[4] = hd_scale(z[4], -k1)
    f[5] = hd_scale(z[5], -k2)
    return 0


cdef int directional(double* z, double* direction, double xo, double yo, double ro,
                     double rs, double dmin, double lf, double lr, double k1, double k2,
                     double* rate, double* drate):
    cdef HD zz[6]
    cdef HD f[6]
    cdef HD w[3]
    cdef HTerms t
    cdef int i
    for i in range(6):
        zz[i] = hd(z[i], direction[i], 0.0, 0.0)
    if drift(zz, f, lf, lr, k1, k2):
        return 3
    for i in range(3):
        w[i] = hd(zz[i].a, zz[i].b, f[i].a, f[i].b)
    t = h_terms(w[0], w[1], w[2], xo, yo, ro, rs, dmin)
    if t.status:
        return t.status
    rate[0] = t.h2.c
    drate[0] = t.h2.d
    return 0


cdef _raise(int status, double h1):
    if status == 1:
        raise CoincidentPointError("vehicle front point coincides with obstacle center")
    if status == 2:
        raise BarrierDomainError(f"h1 = {h1:.6g} <= 0 (inside expanded unsafe region)")
    raise SingularKinematicsError("l_f*cos(beta) + l_r vanished")


def barrier_chain(z, double xo, double yo, double ro, double rs, double dmin,
                  double lf, double lr, double k1, double k2):
    """Return ``(h0, h1, h2, h2_dot, lf2_h2, lglf_v, lglf_w, eta, clamp_flag)``."""
    cdef double zc[6]
    cdef double d[6]
    cdef HD zz[6]
    cdef HD f[6]
    cdef HTerms t
    cdef double rate, lf2, dv, dw, tmp
    cdef int i, st
    for i in range(6):
        zc[i] = z[i]
        zz[i] = hd(zc[i], 0.0, 0.0, 0.0)
    t = h_terms(zz[0], zz[1], zz[2], xo, yo, ro, rs, dmin)
    if t.status:
        _raise(t.status, t.h1)
    if drift(zz, f, lf, lr, k1, k2):
        _raise(3, 0.0)
    for i in range(6):
        d[i] = f[i].a
    st = directional(zc, d, xo, yo, ro, rs, dmin, lf, lr, k1, k2, &rate, &lf2)
    if st:
        _raise(st, t.h1)
    for i in range(6):
        d[i] = 0.0
    d[4] = k1
    directional(zc, d, xo, yo, ro, rs, dmin, lf, lr, k1, k2, &tmp, &dv)
    d[4] = 0.0
    d[5] = k2
    directional(zc, d, xo, yo, ro, rs, dmin, lf, lr, k1, k2, &tmp, &dw)
    return t.h0, t.h1, t.h2.a, rate, lf2, dv, dw, t.eta, bool(t.flag)


cdef int rhs(double* z, double* cmd, double lf, double lr, double k1, double k2, double* out):
    cdef double den = lf * cos(z[3]) + lr
    if den <= SINGULAR_TOL:
        return 1
    out[0] = z[4] * cos(z[2])
    out[1] = z[4] * sin(z[2])
    out[2] = (z[4] * sin(z[3]) + lr * z[5]) / den
    out[3] = z[5]
    out[4] = k1 * (cmd[0] - z[4])
    out[5] = k2 * (cmd[1] - z[5])
    return 0


def augmented_rhs(z, cmd, double lf, double lr, double k1, double k2):
    cdef double zc[6]
    cdef double cc[2]
    cdef double out[6]
    cdef int i
    for i in range(6):
        zc[i] = z[i]
    cc[0] = cmd[0]
    cc[1] = cmd[1]
    if rhs(zc, cc, lf, lr, k1, k2, out):
        _raise(3, 0.0)
    return [out[i] for i in range(6)]


def rk4_step(z, cmd, double dt, double lf, double lr, double k1, double k2):
    cdef double z0[6]
    cdef double tmp[6]
    cdef double ka[6]
    cdef double kb[6]
    cdef double kc[6]
    cdef double kd[6]
    cdef double cc[2]
    cdef int i
    for i in range(6):
        z0[i] = z[i]
    cc[0] = cmd[0]
    cc[1] = cmd[1]
    if rhs(z0, cc, lf, lr, k1, k2, ka):
        _raise(3, 0.0)
    for i in range(6):
        tmp[i] = z0[i] + 0.5 * dt * ka[i]
    if rhs(tmp, cc, lf, lr, k1, k2, kb):
        _raise(3, 0.0)
    for i in range(6):
        tmp[i] = z0[i] + 0.5 * dt * kb[i]
    if rhs(tmp, cc, lf, lr, k1, k2, kc):
        _raise(3, 0.0)
    for i in range(6):
        tmp[i] = z0[i] + dt * kc[i]
    if rhs(tmp, cc, lf, lr, k1, k2, kd):
        _raise(3, 0.0)
    return [z0[i] + dt / 6.0 * (ka[i] + 2.0 * kb[i] + 2.0 * kc[i] + kd[i]) for i in range(6)]
