"""Compiled inner loops for the violation search.

The objective evaluated here is numerically interchangeable (to well below
1e-12) with the plain-numpy evaluation in :mod:`entbell.inequality`; it
exploits that the searched states are pure-state/white-noise mixtures, so a
joint outcome table is V * |amplitude|^2 + (1 - V)/d^2 without forming the
d^2 x d^2 density matrix.  A full multi-start descent step runs inside one
nogil call, which keeps the per-evaluation cost at a few microseconds and
makes thread workers effective.

Callers must pass angle vectors of exactly 4 * d * (d - 1) entries; the
compiled code does not bounds-check.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit

# Distance codes shared with entropy.DistanceKind (same order as the enum).
DIST_D1 = 0
DIST_D1N = 1
DIST_D2 = 2
DIST_D2N = 3
DIST_COV = 4

_SNAP = 1e-12
_FLOOR = 1e-15


@njit(cache=True, nogil=True)
def _apply_block_right(prod, d, p, q, phi, omega):
    # prod <- prod @ T(p, q); only columns p-1 and q-1 change.
    pi = p - 1
    qi = q - 1
    s = math.sin(omega)
    c = math.cos(omega)
    e = complex(math.cos(phi), math.sin(phi))
    for i in range(d):
        cp = prod[i, pi]
        cq = prod[i, qi]
        prod[i, pi] = cp * (e * s) + cq * c
        prod[i, qi] = cp * (e * c) - cq * s


@njit(cache=True, nogil=True)
def _build_mesh_product(angles, d, prod):
    # prod <- T(d,d-1) @ ... @ T(2,1) for (phi, omega) pairs in canonical order.
    for i in range(d):
        for j in range(d):
            prod[i, j] = 1.0 + 0j if i == j else 0.0 + 0j
    k = 0
    for p in range(d, 1, -1):
        for q in range(p - 1, 0, -1):
            _apply_block_right(prod, d, p, q, angles[2 * k], angles[2 * k + 1])
            k += 1


@njit(cache=True, nogil=True)
def _entropy(p, n, q, shannon):
    if shannon:
        h = 0.0
        for i in range(n):
            if p[i] >= _FLOOR:
                h -= p[i] * math.log(p[i])
    else:
        s = 0.0
        for i in range(n):
            if p[i] >= _FLOOR:
                s += p[i] ** q
        h = (1.0 - s) / (q - 1.0)
    if h < 0.0 and h >= -_SNAP:
        h = 0.0
    return h


@njit(cache=True, nogil=True)
def _pair_distance(pa, pb, coeffs, d, vis, dist_id, q, shannon):
    # pa, pb are mesh products; the corresponding local unitaries are their
    # conjugate transposes, so the joint amplitude is sum_k c_k pa[k,m] pb[k,n]
    # up to conjugation, which |.|^2 removes.
    pt = np.empty(d * d, np.float64)
    px = np.zeros(d, np.float64)
    py = np.zeros(d, np.float64)
    off = (1.0 - vis) / (d * d)
    for m in range(d):
        for n in range(d):
            amp = 0.0 + 0j
            for k in range(d):
                amp += coeffs[k] * pa[k, m] * pb[k, n]
            v = vis * (amp.real * amp.real + amp.imag * amp.imag) + off
            pt[m * d + n] = v
            px[m] += v
            py[n] += v
    if dist_id == DIST_COV:
        return 1.0 - (pt[0] - pt[1] - pt[2] + pt[3])
    hxy = _entropy(pt, d * d, q, shannon)
    hx = _entropy(px, d, q, shannon)
    hy = _entropy(py, d, q, shannon)
    mi = hx + hy - hxy
    if dist_id == DIST_D1:
        dist = hxy - mi
    elif dist_id == DIST_D2:
        dist = (hx if hx > hy else hy) - mi
    else:
        denom = hxy if dist_id == DIST_D1N else (hx if hx > hy else hy)
        if denom == 0.0:
            return 0.0
        dist = 1.0 - mi / denom
    if dist < 0.0 and dist >= -_SNAP:
        dist = 0.0
    if (dist_id == DIST_D1N or dist_id == DIST_D2N) and 1.0 < dist <= 1.0 + _SNAP:
        dist = 1.0
    return dist


@njit(cache=True, nogil=True)
def violation_from_angles(x, d, coeffs, vis, dist_id, q, shannon):
    """R - L of the quadrangle at one point of the angle search space.

    ``x`` packs the four settings (a, a', b, b') with 2 angles (phi, omega)
    per mode pair in canonical order, d*(d-1) angles per setting.
    """
    na = d * (d - 1)
    prods = np.empty((4, d, d), np.complex128)
    for s in range(4):
        _build_mesh_product(x[s * na:(s + 1) * na], d, prods[s])
    r = _pair_distance(prods[0], prods[2], coeffs, d, vis, dist_id, q, shannon)
    r += _pair_distance(prods[1], prods[2], coeffs, d, vis, dist_id, q, shannon)
    r += _pair_distance(prods[1], prods[3], coeffs, d, vis, dist_id, q, shannon)
    r -= _pair_distance(prods[0], prods[3], coeffs, d, vis, dist_id, q, shannon)
    return r


@njit(cache=True, nogil=True)
def run_descent(x0, d, coeffs, vis, dist_id, q, shannon, step, fatol, max_evals):
    """Nelder-Mead descent of the violation from one start point.

    Standard reflect/expand/contract/shrink simplex with coefficients
    (1, 2, 1/2, 1/2), terminating when the simplex value spread drops to
    ``fatol`` or the evaluation budget is exhausted.  Returns the best point,
    its value and the number of objective evaluations.
    """
    n = x0.size
    m = n + 1
    sim = np.empty((m, n), np.float64)
    fs = np.empty(m, np.float64)
    sim[0] = x0
    fs[0] = violation_from_angles(sim[0], d, coeffs, vis, dist_id, q, shannon)
    evals = 1
    for i in range(n):
        sim[i + 1] = x0
        sim[i + 1, i] += step
        fs[i + 1] = violation_from_angles(sim[i + 1], d, coeffs, vis, dist_id, q, shannon)
        evals += 1
    order = np.argsort(fs)
    sim = sim[order]
    fs = fs[order]
    cent = np.empty(n, np.float64)
    xr = np.empty(n, np.float64)
    xe = np.empty(n, np.float64)
    xc = np.empty(n, np.float64)
    while evals < max_evals:
        if fs[m - 1] - fs[0] <= fatol:
            break
        for j in range(n):
            s = 0.0
            for i in range(m - 1):
                s += sim[i, j]
            cent[j] = s / (m - 1)
        for j in range(n):
            xr[j] = cent[j] + (cent[j] - sim[m - 1, j])
        fr = violation_from_angles(xr, d, coeffs, vis, dist_id, q, shannon)
        evals += 1
        if fr < fs[0]:
            for j in range(n):
                xe[j] = cent[j] + 2.0 * (cent[j] - sim[m - 1, j])
            fe = violation_from_angles(xe, d, coeffs, vis, dist_id, q, shannon)
            evals += 1
            if fe < fr:
                sim[m - 1] = xe
                fs[m - 1] = fe
            else:
                sim[m - 1] = xr
                fs[m - 1] = fr
        elif fr < fs[m - 2]:
            sim[m - 1] = xr
            fs[m - 1] = fr
        else:
            shrink = False
            if fr < fs[m - 1]:
                for j in range(n):
                    xc[j] = cent[j] + 0.5 * (xr[j] - cent[j])
                fc = violation_from_angles(xc, d, coeffs, vis, dist_id, q, shannon)
                evals += 1
                if fc <= fr:
                    sim[m - 1] = xc
                    fs[m - 1] = fc
                else:
                    shrink = True
            else:
                for j in range(n):
                    xc[j] = cent[j] + 0.5 * (sim[m - 1, j] - cent[j])
                fc = violation_from_angles(xc, d, coeffs, vis, dist_id, q, shannon)
                evals += 1
                if fc < fs[m - 1]:
                    sim[m - 1] = xc
                    fs[m - 1] = fc
                else:
                    shrink = True
            if shrink:
                for i in range(1, m):
                    for j in range(n):
                        sim[i, j] = sim[0, j] + 0.5 * (sim[i, j] - sim[0, j])
                    fs[i] = violation_from_angles(sim[i], d, coeffs, vis, dist_id, q, shannon)
                    evals += 1
        order = np.argsort(fs)
        sim = sim[order]
        fs = fs[order]
    best = np.argmin(fs)
    return sim[best], fs[best], evals


def warm_up() -> None:
    """Force compilation of every kernel signature (cached on disk afterwards)."""
    x = np.full(8, 0.3)
    c = np.array([1.0, 1.0]) / math.sqrt(2.0)
    run_descent(x, 2, c, 0.9, DIST_COV, 0.0, True, 0.3, 1e-6, 40)
    run_descent(x, 2, c, 0.9, DIST_D1, 2.0, False, 0.3, 1e-6, 40)
    violation_from_angles(x, 2, c, 0.9, DIST_D1, 0.0, True)
