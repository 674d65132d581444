"""Compiled per-pixel energy and gradient accumulation.

A polytope's membership at a pixel is accumulated as a running product of
sigmoids; once it drops below ``G_CUTOFF`` the remaining factors are skipped
and ``g`` is taken as 0.  Dropped terms are below 1e-22 in magnitude.
"""

import math

import numba
import numpy as np

G_CUTOFF = 1e-22


@numba.njit(cache=True, inline="always")
def _sigmoid(z):
    if z >= 0.0:
        return 1.0 / (1.0 + math.exp(-z))
    e = math.exp(z)
    return e / (1.0 + e)


@numba.njit(cache=True)
def memberships(params, points):
    n, m = params.shape[0], params.shape[1]
    npts = points.shape[0]
    g = np.zeros((n, npts))
    for p in range(npts):
        x = points[p, 0]
        y = points[p, 1]
        for i in range(n):
            gi = 1.0
            for j in range(m):
                gi *= _sigmoid(params[i, j, 0] * x + params[i, j, 1] * y + params[i, j, 2])
                if gi < G_CUTOFF:
                    gi = 0.0
                    break
            g[i, p] = gi
    return g


@numba.njit(cache=True)
def evaluate(params, points, target, overlap_weight, spill_weight, area,
             signed_eta, want_grad):
    """Return ``(data, overlap, spill, grad)``; ``grad`` is zeros unless requested.

    ``overlap_weight`` scales each pixel's contribution to the overlap term;
    ``spill`` is ``sum_p spill_weight[p] * sum_i g_i`` (times pixel area).
    """
    n, m = params.shape[0], params.shape[1]
    npts = points.shape[0]
    grad = np.zeros(params.shape)
    g = np.empty(n)
    sig = np.empty((n, m))
    prefix = np.empty(n + 1)
    suffix = np.empty(n + 1)
    data = 0.0
    overlap = 0.0
    spill = 0.0
    for p in range(npts):
        x = points[p, 0]
        y = points[p, 1]
        s = 0.0
        s2 = 0.0
        prefix[0] = 1.0
        for i in range(n):
            gi = 1.0
            for j in range(m):
                sj = _sigmoid(params[i, j, 0] * x + params[i, j, 1] * y + params[i, j, 2])
                sig[i, j] = sj
                gi *= sj
                if gi < G_CUTOFF:
                    gi = 0.0
                    break
            g[i] = gi
            s += gi
            s2 += gi * gi
            prefix[i + 1] = prefix[i] * (1.0 - gi)
        resid = 1.0 - prefix[n] - target[p]
        ow = overlap_weight[p]
        sw = spill_weight[p]
        data += resid * resid
        overlap += ow * (s * s - s2)
        spill += sw * s
        if not want_grad or s == 0.0:
            continue
        suffix[n] = 1.0
        for i in range(n - 1, -1, -1):
            suffix[i] = suffix[i + 1] * (1.0 - g[i])
        for i in range(n):
            gi = g[i]
            if gi == 0.0:
                continue
            # dE/dg_i: data chain factor prod_{r != i}(1 - g_r); ordered-pair
            # overlap sum contributes 2 * sum_{r != i} g_r
            de_dg = (2.0 * resid * prefix[i] * suffix[i + 1]
                     + signed_eta * ow * 2.0 * (s - gi) + sw)
            w = area * de_dg * gi
            if w == 0.0:
                continue
            for j in range(m):
                c = w * (1.0 - sig[i, j])
                grad[i, j, 0] += c * x
                grad[i, j, 1] += c * y
                grad[i, j, 2] += c
    return area * data, area * overlap, area * spill, grad
