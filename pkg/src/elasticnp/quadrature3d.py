"""Galerkin blocks on closed surfaces.

Sphere-like surfaces (charts of the unit sphere) use real spherical
harmonics of degree <= L on the parameter sphere.  For each collocation
node the boundary integral is computed with a product rule in polar
coordinates centred at that node (Gauss-Legendre in the polar angle,
trapezoid in the azimuth), which removes the 1/r singularity through the
sin(theta) Jacobian.  Principal-value and weakly singular blocks use the
constant-action subtraction K1[b] = 0, K2[1] = 1/2, K3[b] = -b/6.

Collocated rows are projected onto the harmonic space with the surface
quadrature: T_hat = M^-1 E^T W T_nodal, with E = Y (x) I_3 and
M = E^T W E.

The torus uses trigonometric interpolation on its doubly periodic grid,
a partition of unity around each target, a polar patch for the near part
and the trapezoid rule for the far part.
"""
from __future__ import annotations

import math

import numpy as np

from . import _backend
from ._sh import n_harmonics, real_sh

_PAIRS = ((0, 0), (0, 1), (0, 2), (1, 1), (1, 2), (2, 2))
_ANTI = ((0, 1), (0, 2), (1, 2))


def default_radial_order(n_polar):
    return int(math.ceil(1.5 * n_polar))


def _local_rule(nr):
    """Polar-coordinate rule on the unit sphere around the north pole."""
    xg, wg = np.polynomial.legendre.leggauss(nr)
    th = (xg + 1) * np.pi / 2
    wth = wg * np.pi / 2
    ph = np.pi * np.arange(2 * nr) / nr
    T, P = np.meshgrid(th, ph, indexing="ij")
    loc = np.stack([np.sin(T) * np.cos(P), np.sin(T) * np.sin(P), np.cos(T)], -1).reshape(-1, 3)
    wl = np.repeat(wth * np.sin(th), 2 * nr) * (np.pi / nr)
    return loc, wl


def _frames(p):
    """Rotation-equivariant orthonormal frames (columns e1, e2, p)."""
    e1 = np.cross(np.array([0.0, 0.0, 1.0]), p)
    e1 /= np.linalg.norm(e1, axis=1)[:, None]
    e2 = np.cross(p, e1)
    return np.stack([e1, e2, p], -1)


def _sym(v):
    """Six (a <= b) entries -> symmetric 3 x 3 (leading axes preserved)."""
    out = np.empty(v.shape[:-1] + (3, 3))
    for c, (a, b) in enumerate(_PAIRS):
        out[..., a, b] = v[..., c]
        out[..., b, a] = v[..., c]
    return out


def _anti(v):
    out = np.zeros(v.shape[:-1] + (3, 3))
    for c, (a, b) in enumerate(_ANTI):
        out[..., a, b] = v[..., c]
        out[..., b, a] = -v[..., c]
    return out


class HarmonicGalerkin:
    """Param-free Galerkin blocks on a sphere-like surface.

    Attributes (coefficient space, vector blocks ordered coefficient-major):
    ``S0`` scalar Laplace single layer, ``K0`` scalar Laplace double layer,
    ``B`` dyadic part of the Kelvin single layer, ``K1``, ``K2``, ``K3``.
    """

    def __init__(self, surface, L=None, nr=None, n_quad=None):
        self.surface = surface
        n = surface.n_polar
        self.L = n - 1 if L is None else int(L)
        self.nr = default_radial_order(n) if nr is None else int(nr)
        self.nb = n_harmonics(self.L)
        # nodal <-> coefficient maps use the parameter-sphere rule, exact on the space
        self.Y = real_sh(self.L, surface.param_nodes)
        self._Wp = surface.param_weights
        # Galerkin tests use a finer target grid unless the chart is a round sphere,
        # where the space is invariant and the geometry grid is already exact
        if n_quad is None:
            n_quad = n if surface.kind == "sphere" else int(math.ceil(1.5 * n))
        self.n_quad = int(n_quad)
        self.quad = surface if self.n_quad == n else surface.refined(self.n_quad)
        self.Yq = self.Y if self.quad is surface else real_sh(self.L, self.quad.param_nodes)
        w = self.quad.weights
        self.Mscal = self.Yq.T @ (w[:, None] * self.Yq)
        self._assemble()

    def _project_rows(self, rows):
        """rows: (Nq, ..., nb) values at the target grid -> M^-1 Y^T W rows."""
        w = self.quad.weights
        tmp = np.tensordot(self.Yq * w[:, None], rows, axes=(0, 0))
        sh = tmp.shape
        tmp = np.linalg.solve(self.Mscal, tmp.reshape(self.nb, -1))
        return tmp.reshape(sh)

    def _assemble(self):
        s = self.quad
        chart = s.chart
        loc, wl = _local_rule(self.nr)
        F = _frames(s.param_nodes)
        theta = s.patch_info["theta"]
        nphi = s.patch_info["n_phi"]
        N, nb = s.n_nodes, self.nb
        rows = np.empty((N, 17, nb))
        sums = np.empty((N, 17))
        for ring in range(len(theta)):
            idx = np.arange(ring * nphi, (ring + 1) * nphi)
            pq = np.einsum("qk,tjk->tqj", loc, F[idx])          # (T, Q, 3) global param pts
            Xq, Nq, Jq = chart.evaluate(pq)
            Wq = wl[None, :] * Jq
            kr = _backend.kernel_rows_3d(np.ascontiguousarray(s.nodes[idx]),
                                         np.ascontiguousarray(Xq), np.ascontiguousarray(Nq),
                                         np.ascontiguousarray(Wq))
            Yq = real_sh(self.L, pq)
            rows[idx] = np.matmul(kr, Yq)
            sums[idx] = kr.sum(-1)
        Yn = self.Yq
        # constant subtraction on the rows that need it
        sub = rows - sums[:, :, None] * Yn[:, None, :]
        S0 = rows[:, 0]
        Bn = _sym(np.moveaxis(rows[:, 1:7], 1, -1))            # (N, nb, 3, 3)
        K2n = sub[:, 7] + 0.5 * Yn
        K1n = _anti(np.moveaxis(sub[:, 8:11], 1, -1))
        K3n = _sym(np.moveaxis(sub[:, 11:17], 1, -1)) - np.eye(3) * (Yn / 6.0)[:, :, None, None]
        self.S0 = self._project_rows(S0)
        self.K0 = self._project_rows(K2n)
        eye = np.eye(3)
        self.B = self._vec(Bn)
        self.K1 = self._vec(K1n)
        self.K2 = np.kron(self.K0, eye)
        self.K3 = self._vec(K3n)

    def _vec(self, blocks):
        """(N, nb, 3, 3) nodal row blocks [i, a, r, k] -> (3 nb, 3 nb) coefficient matrix."""
        P = self._project_rows(blocks)                          # (nb_b, nb_a, r, k)
        return P.transpose(0, 2, 1, 3).reshape(3 * self.nb, 3 * self.nb)

    # space maps
    @property
    def mass(self):
        return np.kron(self.Mscal, np.eye(3))

    def synthesize(self, coeffs, pts=None):
        """Nodal (or arbitrary parameter point) values of coefficient vectors."""
        c = np.asarray(coeffs, float).reshape(self.nb, 3, *np.shape(coeffs)[1:])
        Y = self.Y if pts is None else real_sh(self.L, pts)
        return np.tensordot(Y, c, axes=(1, 0)).reshape(len(Y) * 3, *np.shape(coeffs)[1:])

    def project(self, values):
        """Coefficients of nodal vector values (exact for fields in the space)."""
        v = np.asarray(values, float)
        tail = v.shape[1:]
        v = v.reshape(self.surface.n_nodes, 3, -1)
        c = np.tensordot(self.Y * self._Wp[:, None], v, axes=(0, 0))
        return c.reshape(3 * self.nb, *tail)


# ---------------------------------------------------------------------------
# torus


def _trig_interp_matrix(n, s):
    """Rows interpolating n-periodic samples at uniform nodes 2 pi j / n to points s."""
    h = 2 * np.pi / n
    x = np.asarray(s, float)[:, None] - h * np.arange(n)[None, :]
    out = np.empty_like(x)
    small = np.abs(np.sin(x / 2)) < 1e-14
    xs = np.where(small, 1.0, x)
    # Dirichlet kernel for even n with the Nyquist term split evenly
    out = np.sin(n * xs / 2) * np.cos(xs / 2) / (n * np.sin(xs / 2))
    out[small] = 1.0
    return out


def _bump(t):
    """Smooth partition function: 1 at t = 0, 0 for t >= 1, all derivatives vanish at 1."""
    t = np.asarray(t, float)
    out = np.zeros_like(t)
    inside = t < 1
    ti = t[inside]
    with np.errstate(over="ignore", divide="ignore"):
        out[inside] = np.exp(2 * np.exp(-1 / np.maximum(ti, 1e-300)) / (ti - 1))
    out[t <= 0] = 1.0
    return out


class TorusNystrom:
    """Nodal blocks on a torus grid (trigonometric interpolation space)."""

    def __init__(self, surface, n_rho=None, n_ang=None, patch=None):
        self.surface = surface
        s = surface
        R, r = s.chart.params
        nu, nv = s.patch_info["n_u"], s.patch_info["n_v"]
        self.nu, self.nv = nu, nv
        self.n_rho = n_rho or max(12, nv)
        self.n_ang = n_ang or max(24, 2 * nv)
        # patch radius in arc length: a fixed fraction of the tube circumference
        self.patch = patch or 0.8 * np.pi * r
        self._assemble()

    def _assemble(self):
        s = self.surface
        chart = s.chart
        nu, nv = self.nu, self.nv
        N = s.n_nodes
        uv = s.param_nodes
        Xu, Xv = chart.derivatives(uv[:, 0], uv[:, 1])
        gu = np.linalg.norm(Xu, axis=1)
        gv = np.linalg.norm(Xv, axis=1)
        xg, wg = np.polynomial.legendre.leggauss(self.n_rho)
        rho = (xg + 1) * self.patch / 2
        wrho = wg * self.patch / 2
        ang = 2 * np.pi * np.arange(self.n_ang) / self.n_ang
        RR, AA = np.meshgrid(rho, ang, indexing="ij")
        wpol = (np.outer(wrho * rho * _bump(rho / self.patch), np.full(self.n_ang, 2 * np.pi / self.n_ang))).ravel()
        a = (RR * np.cos(AA)).ravel()
        b = (RR * np.sin(AA)).ravel()
        rows = np.zeros((N, 17, N))
        sums = np.zeros((N, 17))
        # far-field partition weights use the same metric-scaled parameter distance
        du = (uv[None, :, 0] - uv[:, None, 0] + np.pi) % (2 * np.pi) - np.pi
        dv = (uv[None, :, 1] - uv[:, None, 1] + np.pi) % (2 * np.pi) - np.pi
        for i in range(N):
            # far part on the grid
            dist = np.hypot(du[i] * gu[i], dv[i] * gv[i])
            wfar = s.weights * (1 - _bump(dist / self.patch))
            wfar[i] = 0.0
            far_idx = np.nonzero(wfar)[0]
            kr = _backend.kernel_rows_3d(s.nodes[i:i + 1], s.nodes[None, far_idx].copy(),
                                         s.normals[None, far_idx].copy(), wfar[None, far_idx].copy())[0]
            rows[i][:, far_idx] += kr
            sums[i] += kr.sum(-1)
            # near part on the polar patch
            u = uv[i, 0] + a / gu[i]
            v = uv[i, 1] + b / gv[i]
            Xq, Nq, Jq = chart.evaluate(u, v)
            Wq = wpol * Jq / (gu[i] * gv[i])
            kr = _backend.kernel_rows_3d(s.nodes[i:i + 1], Xq[None].copy(), Nq[None].copy(),
                                         Wq[None].copy())[0]
            Iu = _trig_interp_matrix(nu, u)
            Iv = _trig_interp_matrix(nv, v)
            interp = (Iu[:, :, None] * Iv[:, None, :]).reshape(len(u), N)
            rows[i] += kr @ interp
            sums[i] += kr.sum(-1)
        eye_n = np.eye(N)
        sub = rows - sums[:, :, None] * eye_n[:, None, :]
        self.S0 = rows[:, 0]
        self.K0 = sub[:, 7] + 0.5 * eye_n
        self.B = self._vec(_sym(np.moveaxis(rows[:, 1:7], 1, -1)))
        self.K1 = self._vec(_anti(np.moveaxis(sub[:, 8:11], 1, -1)))
        self.K2 = np.kron(self.K0, np.eye(3))
        self.K3 = self._vec(_sym(np.moveaxis(sub[:, 11:17], 1, -1))
                            - np.eye(3) * (eye_n / 6.0)[:, :, None, None])

    @staticmethod
    def _vec(blocks):
        N = blocks.shape[0]
        return blocks.transpose(0, 2, 1, 3).reshape(3 * N, 3 * N)
