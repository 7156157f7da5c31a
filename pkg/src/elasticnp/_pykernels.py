"""Pure numpy implementations of the hot kernel loops.

``_ckernels`` (Cython) provides the same functions with identical
signatures; :mod:`elasticnp._backend` picks one at import time.
"""
from __future__ import annotations

import numpy as np

N_ROWS = 17
_PAIRS = ((0, 0), (0, 1), (0, 2), (1, 1), (1, 2), (2, 2))
_ANTI = ((0, 1), (0, 2), (1, 2))
FOUR_PI = 4.0 * np.pi


def kernel_rows_3d(X, Y, NY, W):
    """Weighted kernel samples for a batch of targets.

    Parameters
    ----------
    X : (T, 3) targets; Y, NY : (T, Q, 3) sources and normals; W : (T, Q) weights.

    Returns
    -------
    (T, 17, Q) array with rows: single layer -1/(4 pi r); dyadic
    -d_a d_b/(4 pi r^3) for the six pairs (a <= b); double layer
    -(d.n)/(4 pi r^3); antisymmetric (d_a n_b - n_a d_b)/(4 pi r^3) for
    (01, 02, 12); (d.n) d_a d_b/(4 pi r^5) for the six pairs.
    """
    X = np.asarray(X, float)
    d = X[:, None, :] - Y
    r2 = np.einsum("tqk,tqk->tq", d, d)
    r = np.sqrt(r2)
    ir3 = W / (FOUR_PI * r * r2)
    dn = np.einsum("tqk,tqk->tq", d, NY)
    out = np.empty((X.shape[0], N_ROWS, Y.shape[1]))
    out[:, 0] = -W / (FOUR_PI * r)
    for c, (a, b) in enumerate(_PAIRS):
        out[:, 1 + c] = -d[..., a] * d[..., b] * ir3
    out[:, 7] = -dn * ir3
    for c, (a, b) in enumerate(_ANTI):
        out[:, 8 + c] = (d[..., a] * NY[..., b] - NY[..., a] * d[..., b]) * ir3
    s = dn * ir3 / r2
    for c, (a, b) in enumerate(_PAIRS):
        out[:, 11 + c] = s * d[..., a] * d[..., b]
    return out


def potential_terms(targets, src, nrm, w, dens, chunk=256):
    """Layer-potential building blocks at off-boundary targets (m = 2 or 3).

    With G0 the Laplace fundamental solution (ln r / 2 pi or -1/(4 pi r))
    and grad G0 = d / (omega r^m), d = x - y, returns a (P, 4 m + 1 + c)
    array stacking, per target::

        sum w G0 psi                       (m)  Laplace single layer
        sum w (-d (d.psi) / (omega r^m))   (m)  dyadic part of the Kelvin matrix
        sum w grad G0 . psi                (1)
        sum w grad G0 x psi                (c = 1 in 2D, 3 in 3D)
        sum w (-(d.n)/(omega r^m)) psi     (m)  Laplace double layer
        sum w (d (n.psi) - n (d.psi))/(omega r^m)  (m)
    """
    targets = np.asarray(targets, float)
    m = targets.shape[1]
    om = 2 * np.pi if m == 2 else FOUR_PI
    ncurl = 1 if m == 2 else 3
    out = np.empty((len(targets), 4 * m + 1 + ncurl))
    for s0 in range(0, len(targets), chunk):
        x = targets[s0:s0 + chunk]
        d = x[:, None, :] - src[None]
        r2 = np.einsum("pqk,pqk->pq", d, d)
        if np.any(r2 == 0):
            raise ValueError("evaluation point coincides with a quadrature node")
        if m == 2:
            g0 = np.log(r2) / (4 * np.pi)
            irm = 1.0 / (om * r2)
        else:
            r = np.sqrt(r2)
            g0 = -1.0 / (om * r)
            irm = 1.0 / (om * r * r2)
        dpsi = np.einsum("pqk,qk->pq", d, dens)
        dn = np.einsum("pqk,qk->pq", d, nrm)
        npsi = np.einsum("qk,qk->q", nrm, dens)
        wg = w * irm
        o = out[s0:s0 + chunk]
        o[:, 0:m] = (g0 * w) @ dens
        o[:, m:2 * m] = -np.einsum("pq,pqk->pk", dpsi * wg, d)
        o[:, 2 * m] = np.einsum("pq,pq->p", dpsi, wg)
        gd = d * wg[..., None]
        if m == 2:
            o[:, 2 * m + 1] = gd[..., 0] @ dens[:, 1] - gd[..., 1] @ dens[:, 0]
        else:
            o[:, 7] = gd[..., 1] @ dens[:, 2] - gd[..., 2] @ dens[:, 1]
            o[:, 8] = gd[..., 2] @ dens[:, 0] - gd[..., 0] @ dens[:, 2]
            o[:, 9] = gd[..., 0] @ dens[:, 1] - gd[..., 1] @ dens[:, 0]
        base = 2 * m + 1 + ncurl
        o[:, base:base + m] = -(dn * wg) @ dens
        o[:, base + m:base + 2 * m] = (np.einsum("pq,pqk->pk", wg * npsi[None, :], d)
                                       - (dpsi * wg) @ nrm)
    return out
