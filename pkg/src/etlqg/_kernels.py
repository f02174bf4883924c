"""Numba kernels for the tight per-step simulation loops.

State dimension is small (1-4), so matrix products are written as explicit
loops; the noise array is generated outside with numpy Generators so that
stream splitting stays in numpy land and the kernels remain deterministic
pure functions of their inputs.
"""

import numpy as np
from numba import njit

# States with |x_i| beyond this are treated as numerically divergent.
_OVERFLOW = 1e150


@njit(cache=True)
def grid_fire(maskf, w1, w2, dx1, dx2, x1, x2):
    """Trigger test against a stored continuation-region mask.

    maskf holds 1.0 on nodes inside the region and 0.0 outside; the decision
    uses bilinear interpolation with threshold 1/2, so the firing boundary
    coincides with the marching-squares polyline of the mask.  Points outside
    the grid fire unconditionally.
    """
    n1 = maskf.shape[0] - 1
    n2 = maskf.shape[1] - 1
    u = (x1 + w1) / dx1
    v = (x2 + w2) / dx2
    if u <= 0.0 or u >= n1 or v <= 0.0 or v >= n2:
        return True
    iu = int(u)
    iv = int(v)
    fu = u - iu
    fv = v - iv
    m = (
        maskf[iu, iv] * (1.0 - fu) * (1.0 - fv)
        + maskf[iu + 1, iv] * fu * (1.0 - fv)
        + maskf[iu, iv + 1] * (1.0 - fu) * fv
        + maskf[iu + 1, iv + 1] * fu * fv
    )
    return m <= 0.5


@njit(cache=True)
def sim_periodic(Astep, Nmat, Q, k_per, h, burn, xi):
    """Euler-Maruyama run with a reset every k_per steps.

    Returns (cost, reset_count, finite_ok); cost is the running integral of
    x'Qx over steps at index >= burn, resets before burn are not counted.
    """
    n = Astep.shape[0]
    x = np.zeros(n)
    xn = np.zeros(n)
    cost = 0.0
    count = 0
    since = 0
    for k in range(xi.shape[0]):
        for i in range(n):
            s = 0.0
            for j in range(n):
                s += Astep[i, j] * x[j] + Nmat[i, j] * xi[k, j]
            xn[i] = s
        ok = True
        for i in range(n):
            x[i] = xn[i]
            if not (abs(x[i]) < _OVERFLOW):
                ok = False
        if not ok:
            return cost * h, count, False
        if k >= burn:
            q = 0.0
            for i in range(n):
                for j in range(n):
                    q += x[i] * Q[i, j] * x[j]
            cost += q
        since += 1
        if since == k_per:
            for i in range(n):
                x[i] = 0.0
            since = 0
            if k >= burn:
                count += 1
    return cost * h, count, True


@njit(cache=True)
def sim_ellipsoid(Astep, Nmat, Q, P, thresh, h, burn, xi):
    """Euler-Maruyama run resetting when x'Px >= thresh (checked after each step)."""
    n = Astep.shape[0]
    x = np.zeros(n)
    xn = np.zeros(n)
    cost = 0.0
    count = 0
    for k in range(xi.shape[0]):
        for i in range(n):
            s = 0.0
            for j in range(n):
                s += Astep[i, j] * x[j] + Nmat[i, j] * xi[k, j]
            xn[i] = s
        ok = True
        for i in range(n):
            x[i] = xn[i]
            if not (abs(x[i]) < _OVERFLOW):
                ok = False
        if not ok:
            return cost * h, count, False
        if k >= burn:
            q = 0.0
            for i in range(n):
                for j in range(n):
                    q += x[i] * Q[i, j] * x[j]
            cost += q
        p = 0.0
        for i in range(n):
            for j in range(n):
                p += x[i] * P[i, j] * x[j]
        if p >= thresh:
            for i in range(n):
                x[i] = 0.0
            if k >= burn:
                count += 1
    return cost * h, count, True


@njit(cache=True)
def sim_grid(Astep, Nmat, Q, maskf, w1, w2, dx1, dx2, h, burn, xi):
    """Euler-Maruyama run (n = 2) resetting on the stored grid trigger."""
    x = np.zeros(2)
    xn = np.zeros(2)
    cost = 0.0
    count = 0
    for k in range(xi.shape[0]):
        for i in range(2):
            s = 0.0
            for j in range(2):
                s += Astep[i, j] * x[j] + Nmat[i, j] * xi[k, j]
            xn[i] = s
        ok = True
        for i in range(2):
            x[i] = xn[i]
            if not (abs(x[i]) < _OVERFLOW):
                ok = False
        if not ok:
            return cost * h, count, False
        if k >= burn:
            q = 0.0
            for i in range(2):
                for j in range(2):
                    q += x[i] * Q[i, j] * x[j]
            cost += q
        if grid_fire(maskf, w1, w2, dx1, dx2, x[0], x[1]):
            x[0] = 0.0
            x[1] = 0.0
            if k >= burn:
                count += 1
    return cost * h, count, True
