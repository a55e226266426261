"""Hot loops for the hierarchy integration.

The hierarchy state lives in a real (N+1, 4) array: per operator the
coordinates (rho00, rho11, Re rho01, Im rho01) of the *rescaled* auxiliary
zeta~_{n1,n2} = zeta_{n1,n2} / (s1^n1 s2^n2 sqrt(n1! n2!)); the final row is
a permanent zero slot that out-of-range neighbour indices point at.  In these
variables the right-hand side per operator is

    out_i = RB y_i - decay_i y_i + wd1_i G1 y_dn1
            + SM (wd2_i y_dn2 + wu1_i y_up1 + wu2_i y_up2)

with three fixed real 4x4 blocks (RB: unitary + terminator part, G1: -i G_1,
SM: -i S-) and per-operator scalar weights.

Kernels are compiled with numba when available; the numpy fallbacks compute
the same arithmetic (used only when numba is missing).
"""

from __future__ import annotations

import numpy as np

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        if len(args) == 1 and callable(args[0]):
            return args[0]

        def wrap(fn):
            return fn

        return wrap


@njit(cache=True)
def _rhs(y, out, dn1, dn2, up1, up2, wd1, wd2, wu1, wu2, decay, rb, g1, sm):
    n = wd1.shape[0]
    b00 = rb[0, 0]; b01 = rb[0, 1]; b02 = rb[0, 2]; b03 = rb[0, 3]
    b10 = rb[1, 0]; b11 = rb[1, 1]; b12 = rb[1, 2]; b13 = rb[1, 3]
    b20 = rb[2, 0]; b21 = rb[2, 1]; b22 = rb[2, 2]; b23 = rb[2, 3]
    b30 = rb[3, 0]; b31 = rb[3, 1]; b32 = rb[3, 2]; b33 = rb[3, 3]
    g00 = g1[0, 0]; g01 = g1[0, 1]; g02 = g1[0, 2]; g03 = g1[0, 3]
    g10 = g1[1, 0]; g11 = g1[1, 1]; g12 = g1[1, 2]; g13 = g1[1, 3]
    g20 = g1[2, 0]; g21 = g1[2, 1]; g22 = g1[2, 2]; g23 = g1[2, 3]
    g30 = g1[3, 0]; g31 = g1[3, 1]; g32 = g1[3, 2]; g33 = g1[3, 3]
    s00 = sm[0, 0]; s01 = sm[0, 1]; s02 = sm[0, 2]; s03 = sm[0, 3]
    s10 = sm[1, 0]; s11 = sm[1, 1]; s12 = sm[1, 2]; s13 = sm[1, 3]
    s20 = sm[2, 0]; s21 = sm[2, 1]; s22 = sm[2, 2]; s23 = sm[2, 3]
    s30 = sm[3, 0]; s31 = sm[3, 1]; s32 = sm[3, 2]; s33 = sm[3, 3]
    for i in range(n):
        y0 = y[i, 0]; y1 = y[i, 1]; y2 = y[i, 2]; y3 = y[i, 3]
        j = dn1[i]
        w1 = wd1[i]
        a0 = y[j, 0]; a1 = y[j, 1]; a2 = y[j, 2]; a3 = y[j, 3]
        j = dn2[i]
        p = up1[i]
        q = up2[i]
        w2 = wd2[i]
        v1 = wu1[i]
        v2 = wu2[i]
        c0 = w2 * y[j, 0] + v1 * y[p, 0] + v2 * y[q, 0]
        c1 = w2 * y[j, 1] + v1 * y[p, 1] + v2 * y[q, 1]
        c2 = w2 * y[j, 2] + v1 * y[p, 2] + v2 * y[q, 2]
        c3 = w2 * y[j, 3] + v1 * y[p, 3] + v2 * y[q, 3]
        dec = decay[i]
        out[i, 0] = (b00 * y0 + b01 * y1 + b02 * y2 + b03 * y3 - dec * y0
                     + w1 * (g00 * a0 + g01 * a1 + g02 * a2 + g03 * a3)
                     + s00 * c0 + s01 * c1 + s02 * c2 + s03 * c3)
        out[i, 1] = (b10 * y0 + b11 * y1 + b12 * y2 + b13 * y3 - dec * y1
                     + w1 * (g10 * a0 + g11 * a1 + g12 * a2 + g13 * a3)
                     + s10 * c0 + s11 * c1 + s12 * c2 + s13 * c3)
        out[i, 2] = (b20 * y0 + b21 * y1 + b22 * y2 + b23 * y3 - dec * y2
                     + w1 * (g20 * a0 + g21 * a1 + g22 * a2 + g23 * a3)
                     + s20 * c0 + s21 * c1 + s22 * c2 + s23 * c3)
        out[i, 3] = (b30 * y0 + b31 * y1 + b32 * y2 + b33 * y3 - dec * y3
                     + w1 * (g30 * a0 + g31 * a1 + g32 * a2 + g33 * a3)
                     + s30 * c0 + s31 * c1 + s32 * c2 + s33 * c3)
    out[n, 0] = 0.0
    out[n, 1] = 0.0
    out[n, 2] = 0.0
    out[n, 3] = 0.0


@njit(cache=True)
def _rk4_run(y, k1, k2, k3, k4, yt, nsteps, dt,
             dn1, dn2, up1, up2, wd1, wd2, wu1, wu2, decay, rb, g1, sm):
    m = y.shape[0]
    half = 0.5 * dt
    sixth = dt / 6.0
    for _ in range(nsteps):
        _rhs(y, k1, dn1, dn2, up1, up2, wd1, wd2, wu1, wu2, decay, rb, g1, sm)
        for i in range(m):
            for c in range(4):
                yt[i, c] = y[i, c] + half * k1[i, c]
        _rhs(yt, k2, dn1, dn2, up1, up2, wd1, wd2, wu1, wu2, decay, rb, g1, sm)
        for i in range(m):
            for c in range(4):
                yt[i, c] = y[i, c] + half * k2[i, c]
        _rhs(yt, k3, dn1, dn2, up1, up2, wd1, wd2, wu1, wu2, decay, rb, g1, sm)
        for i in range(m):
            for c in range(4):
                yt[i, c] = y[i, c] + dt * k3[i, c]
        _rhs(yt, k4, dn1, dn2, up1, up2, wd1, wd2, wu1, wu2, decay, rb, g1, sm)
        for i in range(m):
            for c in range(4):
                y[i, c] += sixth * (k1[i, c] + 2.0 * (k2[i, c] + k3[i, c]) + k4[i, c])


def _rhs_numpy(y, out, dn1, dn2, up1, up2, wd1, wd2, wu1, wu2, decay, rb, g1, sm):
    yv = y[:-1]
    np.matmul(yv, rb.T, out=out[:-1])
    out[:-1] -= decay[:, None] * yv
    out[:-1] += wd1[:, None] * (y[dn1] @ g1.T)
    comb = wd2[:, None] * y[dn2] + wu1[:, None] * y[up1] + wu2[:, None] * y[up2]
    out[:-1] += comb @ sm.T
    out[-1] = 0.0


def _rk4_run_numpy(y, k1, k2, k3, k4, yt, nsteps, dt,
                   dn1, dn2, up1, up2, wd1, wd2, wu1, wu2, decay, rb, g1, sm):
    args = (dn1, dn2, up1, up2, wd1, wd2, wu1, wu2, decay, rb, g1, sm)
    for _ in range(nsteps):
        _rhs_numpy(y, k1, *args)
        np.multiply(k1, 0.5 * dt, out=yt); yt += y
        _rhs_numpy(yt, k2, *args)
        np.multiply(k2, 0.5 * dt, out=yt); yt += y
        _rhs_numpy(yt, k3, *args)
        np.multiply(k3, dt, out=yt); yt += y
        _rhs_numpy(yt, k4, *args)
        y += (dt / 6.0) * (k1 + 2.0 * (k2 + k3) + k4)


if HAVE_NUMBA:
    rhs = _rhs
    rk4_run = _rk4_run
else:  # pragma: no cover
    rhs = _rhs_numpy
    rk4_run = _rk4_run_numpy
