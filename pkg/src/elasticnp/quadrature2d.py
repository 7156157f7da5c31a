"""Spectrally accurate Nystrom blocks on smooth closed curves.

All matrices act on node-major stacked vectors (index 2 i + c).  Blocks
are independent of the Lame constants; the operators module combines
them.  Conventions: d = x_i - y_j, sums run over source nodes j.

* Logarithmic kernels use Kress's splitting
  ln|x - y| = 1/2 ln(4 sin^2((t - s)/2)) + smooth, with the trigonometric
  product-integration weights for the first term.
* The Cauchy-type principal value in K1 and the Cauchy matrix use the
  alternating-point rule for the cot((t - s)/2) part plus an explicit
  Nyquist-mode correction; the remainder is smooth.
* K2 and K3 have continuous kernels; the trapezoid rule is used with the
  constant-action subtraction (K2[1] = 1/2, K3[b] = -b/4).
"""
from __future__ import annotations

import numpy as np

ROT = np.array([[0.0, -1.0], [1.0, 0.0]])


def kress_weights(N):
    """Weights R_j with sum_j R_{(j-i) mod N} f_j ~ int ln(4 sin^2((t-t_i)/2)) f dt."""
    n = N // 2
    t = 2 * np.pi * np.arange(N) / N
    m = np.arange(1, n)
    return -(2 * np.pi / n) * (np.cos(np.outer(t, m)) / m).sum(1) - (np.pi / n**2) * np.cos(n * t)


def _circulant(row):
    N = len(row)
    idx = (np.arange(N)[None, :] - np.arange(N)[:, None]) % N
    return row[idx]


class CurveData:
    """Pairwise quantities shared by all blocks on one curve."""

    def __init__(self, curve):
        N = curve.N
        self.N = N
        self.h = 2 * np.pi / N
        self.curve = curve
        D = curve.nodes[:, None, :] - curve.nodes[None, :, :]
        r2 = np.einsum("ijk,ijk->ij", D, D)
        np.fill_diagonal(r2, 1.0)
        self.D = D
        self.r2 = r2
        u = curve.t[None, :] - curve.t[:, None]
        off = ~np.eye(N, dtype=bool)
        cot = np.zeros((N, N))
        cot[off] = 1.0 / np.tan(u[off] / 2)
        self.cot = cot
        self.half_sin2 = np.zeros((N, N))
        self.half_sin2[off] = np.log(4 * np.sin(u[off] / 2) ** 2)
        ii = np.arange(N)
        self.opposite = ((ii[:, None] - ii[None, :]) % 2) == 1
        alt = (-1.0) ** ii
        self.nyquist = np.outer(alt, alt) / N


def _node_major(blocks):
    """(N, N, 2, 2) block array -> (2N, 2N) matrix."""
    N = blocks.shape[0]
    return blocks.transpose(0, 2, 1, 3).reshape(2 * N, 2 * N)


def laplace_single_layer(cd):
    """Matrix of (1/2 pi) int ln|x - y| f(y) ds(y)."""
    c = cd.curve
    N, h = cd.N, cd.h
    R = _circulant(kress_weights(N))
    L = 0.5 * np.log(cd.r2) - 0.5 * cd.half_sin2
    np.fill_diagonal(L, np.log(c.speeds))
    return (0.5 * R + h * L) * c.speeds[None, :] / (2 * np.pi)


def dyadic_single_layer(cd):
    """Matrix of -(1/2 pi) int (d d^T / |d|^2) f(y) ds(y); continuous kernel."""
    c = cd.curve
    N = cd.N
    P = cd.D[:, :, :, None] * cd.D[:, :, None, :] / cd.r2[:, :, None, None]
    ii = np.arange(N)
    P[ii, ii] = c.tangents[:, :, None] * c.tangents[:, None, :]
    P *= (-(cd.h / (2 * np.pi)) * c.speeds)[None, :, None, None]
    return _node_major(P)


def k1_block(cd):
    """Principal-value operator with kernel (d n^T - n d^T) / (2 pi |d|^2)."""
    c = cd.curve
    h = cd.h
    # in the parameter t the scalar kernel is (gamma(t_i) - gamma(t_j)).gamma'(t_j) / (2 pi r^2)
    # acting through the rotation; its singular part is -cot((t_j - t_i)/2) / (4 pi)
    g = np.einsum("ijk,jk->ij", cd.D, c.d1) / (2 * np.pi * cd.r2)
    rem = g + cd.cot / (4 * np.pi)
    np.fill_diagonal(rem, -np.sum(c.d1 * c.d2, 1) / c.speeds**2 / (4 * np.pi))
    scal = np.where(cd.opposite, -2 * h * cd.cot / (4 * np.pi), 0.0) + h * rem
    return np.kron(scal, ROT) + np.kron(0.5 * cd.nyquist, np.eye(2))


def k2_scalar(cd):
    """Laplace double-layer (scalar) matrix with K2[1] = 1/2 built in."""
    c = cd.curve
    dn = np.einsum("ijk,jk->ij", cd.D, c.normals)
    k = -dn / (2 * np.pi * cd.r2) * (cd.h * c.speeds)[None, :]
    np.fill_diagonal(k, 0.0)
    k -= np.diag(k.sum(1))
    k += 0.5 * np.eye(cd.N)
    return k


def k3_block(cd):
    """Operator with kernel (d.n) d d^T / (2 pi |d|^4), K3[b] = -b/4 built in."""
    c = cd.curve
    N = cd.N
    dn = np.einsum("ijk,jk->ij", cd.D, c.normals)
    s = dn / (2 * np.pi * cd.r2**2) * (cd.h * c.speeds)[None, :]
    k = s[:, :, None, None] * cd.D[:, :, :, None] * cd.D[:, :, None, :]
    ii = np.arange(N)
    k[ii, ii] = 0.0
    k[ii, ii] = -k.sum(1) - 0.25 * np.eye(2)
    return _node_major(k)


def cauchy_matrix(cd):
    """Complex matrix of the principal-value Cauchy integral (1/2 pi i) int f(w)/(w - z) dw."""
    c = cd.curve
    h = cd.h
    w = c.nodes[:, 0] + 1j * c.nodes[:, 1]
    wp = c.d1[:, 0] + 1j * c.d1[:, 1]
    wpp = c.d2[:, 0] + 1j * c.d2[:, 1]
    dw = w[None, :] - w[:, None]
    np.fill_diagonal(dw, 1.0)
    R = wp[None, :] / dw - 0.5 * cd.cot
    np.fill_diagonal(R, wpp / (2 * wp))
    C = (np.where(cd.opposite, h * cd.cot, 0.0) + h * R) / (2j * np.pi)
    return C - 0.5 * cd.nyquist
