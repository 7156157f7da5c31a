"""Real orthonormal spherical harmonics up to a fixed degree.

Columns are ordered by degree l, then m = 0, then (cos, sin) pairs for
m = 1..l, so degree l occupies columns l^2 .. (l+1)^2 - 1.
"""
from __future__ import annotations

import numpy as np


def n_harmonics(L):
    return (L + 1) ** 2


def degrees(L):
    """Degree of each column."""
    return np.repeat(np.arange(L + 1), 2 * np.arange(L + 1) + 1)


def _legendre(L, x, s):
    """Fully normalized associated Legendre values keyed by (l, m)."""
    out = {}
    pmm = np.full_like(x, np.sqrt(1.0 / (4 * np.pi)))
    for m in range(L + 1):
        if m > 0:
            pmm = pmm * np.sqrt((2 * m + 1) / (2.0 * m)) * s
        out[(m, m)] = pmm
        if m == L:
            break
        p0, p1 = pmm, np.sqrt(2 * m + 3.0) * x * pmm
        out[(m + 1, m)] = p1
        a_prev = np.sqrt((4.0 * (m + 1) ** 2 - 1) / ((m + 1) ** 2 - m * m))
        for l in range(m + 2, L + 1):
            a = np.sqrt((4.0 * l * l - 1) / (l * l - m * m))
            p0, p1 = p1, a * (x * p1 - p0 / a_prev)
            out[(l, m)] = p1
            a_prev = a
    return out


def real_sh(L, pts):
    """Evaluate all real harmonics of degree <= L at unit vectors ``pts`` (..., 3)."""
    pts = np.asarray(pts, float)
    x = np.clip(pts[..., 2], -1.0, 1.0)
    s = np.hypot(pts[..., 0], pts[..., 1])
    phi = np.arctan2(pts[..., 1], pts[..., 0])
    P = _legendre(L, x, s)
    cos_m = [np.ones_like(phi)] + [np.cos(m * phi) for m in range(1, L + 1)]
    sin_m = [np.zeros_like(phi)] + [np.sin(m * phi) for m in range(1, L + 1)]
    out = np.empty(pts.shape[:-1] + (n_harmonics(L),))
    col = 0
    r2 = np.sqrt(2.0)
    for l in range(L + 1):
        out[..., col] = P[(l, 0)]
        col += 1
        for m in range(1, l + 1):
            out[..., col] = r2 * P[(l, m)] * cos_m[m]
            out[..., col + 1] = r2 * P[(l, m)] * sin_m[m]
            col += 2
    return out
