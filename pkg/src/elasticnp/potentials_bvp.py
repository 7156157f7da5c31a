"""Off-boundary layer potentials, Dirichlet solves, jump checks and energy functionals.

Every derivative quantity (divergence, rotation) is obtained from the
analytically differentiated kernels:

* Lame single layer u = S[phi]:   div u = (alpha1 - alpha2) sum w grad G0 . phi,
                                  rot u = (alpha1 + alpha2) sum w grad G0 x phi;
* Laplace single layer v = S0[psi] (componentwise):
                                  div v = sum w grad G0 . psi, rot v = sum w grad G0 x psi.

Densities are resampled onto a finer copy of the boundary before
evaluation (trigonometric interpolation on curves, spherical-harmonic
synthesis on sphere-like surfaces) so that points a few coarse node
spacings from the boundary are still resolved.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla
from scipy.special import roots_jacobi

from . import _backend
from .geometry import Curve2D
from .operators import (NonSPDError, StarInner, _values, assemble_kdiv, assemble_single_layer,
                        get_discretization)

__all__ = [
    "POTENTIAL_KINDS",
    "FieldEvaluator",
    "eval_potential",
    "solve_lame_dirichlet",
    "laplace_extension",
    "boundary_energies",
    "jump_check",
    "richardson_zero",
    "eigenfunction_asymptotics",
    "sample_cloud",
    "membership",
    "volume_energy",
]

POTENTIAL_KINDS = ("single_layer_lame", "double_layer_divfree", "single_layer_laplace",
                   "double_layer_laplace")


def _trig_upsample(values, factor):
    """Trigonometric interpolation of periodic samples (N, k) onto factor * N points."""
    v = np.asarray(values, float)
    N = v.shape[0]
    if factor == 1:
        return v.copy()
    F = np.fft.rfft(v, axis=0)
    if N % 2 == 0:
        F[N // 2] *= 0.5          # split the Nyquist mode symmetrically
    return np.fft.irfft(F, n=factor * N, axis=0) * factor


def _eval_grid(geom, upsample):
    """Fine source grid and a map from coefficient/nodal vectors to its samples."""
    sp = get_discretization(geom)
    m = geom.m
    if isinstance(geom, Curve2D):
        fine = geom.refined(geom.N * upsample)

        def resample(nodal):
            return _trig_upsample(np.asarray(nodal, float).reshape(geom.N, -1), upsample)
        return fine, resample
    if sp.kind == "harmonic":
        fine = geom.refined(geom.n_polar * upsample)
        g = sp.galerkin

        def resample(nodal):
            c = g.project(np.asarray(nodal, float).reshape(-1))
            return g.synthesize(c, pts=fine.param_nodes).reshape(-1, m)
        return fine, resample

    def resample(nodal):
        return np.asarray(nodal, float).reshape(-1, m)
    return geom, resample


@dataclass(eq=False)
class FieldEvaluator:
    """A layer potential ready for evaluation off the boundary.

    ``density`` is given at the nodes of ``geometry`` (scalar or m-vector per
    node).  ``constant`` is added to single-layer values (used by the planar
    Laplace extension, which carries a constant alongside the density).
    """

    geometry: object
    density: np.ndarray
    kind: str
    params: object = None
    constant: np.ndarray | None = None
    upsample: int = 4
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in POTENTIAL_KINDS:
            raise ValueError(f"kind must be one of {POTENTIAL_KINDS}")
        if self.kind == "single_layer_lame" and self.params is None:
            raise ValueError("the Lame single layer needs material parameters")
        g = self.geometry
        d = np.asarray(self.density, float)
        self.scalar = d.size == g.n_nodes and self.kind in ("single_layer_laplace",
                                                            "double_layer_laplace")
        if self.scalar:
            d = np.c_[d.reshape(-1), np.zeros((g.n_nodes, g.m - 1))]
        elif d.size != g.n_nodes * g.m:
            raise ValueError(f"density has {d.size} entries, expected {g.n_nodes * g.m}")
        if not np.all(np.isfinite(d)):
            raise ValueError("density has non-finite entries")
        self.density = d.reshape(g.n_nodes, g.m)
        fine, resample = _eval_grid(g, int(self.upsample))
        self._src = np.ascontiguousarray(fine.nodes)
        self._nrm = np.ascontiguousarray(fine.normals)
        self._w = np.ascontiguousarray(fine.weights)
        self._dens = np.ascontiguousarray(resample(self.density))

    def _terms(self, x):
        x = np.atleast_2d(np.asarray(x, float))
        if x.shape[1] != self.geometry.m:
            raise ValueError("points have the wrong dimension")
        d2 = ((x[:, None, :] - self.geometry.nodes[None]) ** 2).sum(-1)
        if np.any(d2 < 1e-24):
            raise ValueError("evaluation point lies on a boundary node")
        return _backend.potential_terms(np.ascontiguousarray(x), self._src, self._nrm,
                                        self._w, self._dens)

    def evaluate(self, x, derivatives=False):
        """Values at points ``x`` (P, m); with ``derivatives`` also div and rot."""
        t = self._terms(x)
        m = self.geometry.m
        nc = 1 if m == 2 else 3
        base = 2 * m + 1 + nc
        grad_dot, grad_cross = t[:, 2 * m], t[:, 2 * m + 1:base]
        if self.kind == "single_layer_lame":
            a1, a2 = self.params.alpha1, self.params.alpha2
            val = a1 * t[:, :m] + a2 * t[:, m:2 * m]
            div, rot = (a1 - a2) * grad_dot, (a1 + a2) * grad_cross
        elif self.kind == "single_layer_laplace":
            val = t[:, :m] + (0.0 if self.constant is None else self.constant)
            div, rot = grad_dot, grad_cross
        elif self.kind == "double_layer_laplace":
            val, div, rot = t[:, base:base + m], None, None
        else:
            val = t[:, base:base + m] - t[:, base + m:base + 2 * m]
            div, rot = None, None
        if self.scalar:
            val = val[:, 0]
        if not derivatives:
            return val
        if div is None:
            raise NotImplementedError("derivatives are available for single layers only")
        return val, div, (rot[:, 0] if nc == 1 else rot)


def eval_potential(ev, x):
    """Potential values at off-boundary points (one row per point)."""
    return ev.evaluate(x)


def _check_spd(S):
    MS = S.space.mass @ S.matrix
    _, info = sla.lapack.dpotrf(-(MS + MS.T) / 2, lower=1)
    if info != 0:
        hint = " (dilate the curve, e.g. planar.dilation_positivity with r = 16)" \
            if S.geometry.m == 2 else ""
        raise NonSPDError(f"-S is not positive definite (pivot {info}){hint}")


def solve_lame_dirichlet(geom, params, f, upsample=4):
    """u^f = S[S^-1 f], valid on both sides of the boundary."""
    S = assemble_single_layer(geom, params)
    _check_spd(S)
    sp = S.space
    c = sp.project(_values(geom, f))
    phi = sp.synthesize(np.linalg.solve(S.matrix, c))
    return FieldEvaluator(geom, phi, "single_layer_lame", params, upsample=upsample)


def laplace_extension(geom, f, side="interior", upsample=4):
    """Componentwise harmonic extension of f.

    One single-layer density serves both sides.  On curves the density is
    taken with zero mean plus a constant, which keeps the exterior
    extension bounded and the system solvable for every curve scale.
    """
    if side not in ("interior", "exterior"):
        raise ValueError("side must be 'interior' or 'exterior'")
    sp = get_discretization(geom)
    m = geom.m
    v = _values(geom, f).reshape(geom.n_nodes, m)
    const = None
    if isinstance(geom, Curve2D):
        N = geom.N
        A = np.zeros((N + 1, N + 1))
        A[:N, :N] = sp.S0
        A[:N, N] = 1.0
        A[N, :N] = geom.weights
        sol = np.linalg.solve(A, np.vstack([v, np.zeros((1, m))]))
        psi, const = sol[:N], sol[N]
    elif sp.kind == "harmonic":
        g = sp.galerkin
        c = g.project(v.reshape(-1)).reshape(g.nb, m)
        psi = g.synthesize(np.linalg.solve(sp.S0, c).reshape(-1)).reshape(-1, m)
    else:
        psi = np.linalg.solve(sp.S0, v)
    ev = FieldEvaluator(geom, psi, "single_layer_laplace", constant=const, upsample=upsample)
    ev.meta["side"] = side
    return ev


def boundary_energies(geom, params, f):
    """E_int = <(1/2 - K^div) f, f>_* and E_ext = <(1/2 + K^div) f, f>_*.

    E_int is mu ||rot u||^2 + (mu / 2 k0) ||div u||^2 over the interior for
    the Lame extension u of f, and E_ext the same over the exterior.
    """
    S = assemble_single_layer(geom, params)
    star = StarInner(S)
    sp = S.space
    Kd = assemble_kdiv(geom)["Kdiv"].matrix
    c = sp.project(_values(geom, f))
    kc = Kd @ c
    ff = star.inner_coeffs(c, c)
    kf = star.inner_coeffs(kc, c)
    return {"E_int": float(0.5 * ff - kf), "E_ext": float(0.5 * ff + kf), "norm2": float(ff)}


def richardson_zero(eps, values):
    """Polynomial extrapolation to eps = 0 of samples values[i] taken at eps[i]."""
    eps = np.asarray(eps, float)
    w = np.array([np.prod([-e2 / (e1 - e2) for j, e2 in enumerate(eps) if j != i])
                  for i, e1 in enumerate(eps)])
    return np.tensordot(w, np.asarray(values, float), axes=(0, 0))


def jump_check(geom, f, epsilons=None, upsample=None):
    """One-sided traces of the div-free double layer by extrapolation in the offset.

    Evaluates D^div[f](x_i -+ eps nu_i) at every node, extrapolates eps -> 0
    on each side and compares with the jump identity D|_- - D|_+ = f and the
    trace formulas D|_- = (K^div + 1/2) f, D|_+ = (K^div - 1/2) f.
    Defaults: offsets (0.1, 0.05, 0.025) with 4x resampling on curves,
    (0.3, 0.2, 0.1, 0.05) with 8x resampling on surfaces.
    """
    planar = geom.m == 2
    if epsilons is None:
        epsilons = (0.1, 0.05, 0.025) if planar else (0.3, 0.2, 0.1, 0.05)
    if upsample is None:
        upsample = 4 if planar else 8
    eps = sorted((float(e) for e in epsilons), reverse=True)
    if len(eps) < 2 or eps[-1] <= 0:
        raise ValueError("need at least two positive offsets")
    v = _values(geom, f)
    m = geom.m
    ev = FieldEvaluator(geom, v, "double_layer_divfree", upsample=upsample)
    x, nu = geom.nodes, geom.normals
    inner = [ev.evaluate(x - e * nu).reshape(-1) for e in eps]
    outer = [ev.evaluate(x + e * nu).reshape(-1) for e in eps]
    tin, tout = richardson_zero(eps, inner), richardson_zero(eps, outer)
    kf = assemble_kdiv(geom)["Kdiv"].apply(v)
    scale = np.abs(v).max()
    return {
        "epsilons": eps,
        "inner_trace": tin,
        "outer_trace": tout,
        "jump_residual": float(np.abs(tin - tout - v).max() / scale),
        "inner_residual": float(np.abs(tin - kf - 0.5 * v).max() / scale),
        "outer_residual": float(np.abs(tout - kf + 0.5 * v).max() / scale),
        "raw_jump_residuals": [float(np.abs(a - b - v).max() / scale) for a, b in zip(inner, outer)],
        "m": m,
    }


def eigenfunction_asymptotics(enpspec):
    """Per eigenfunction: E_int, E_ext and their sum (which is 1 for normalized f_j).

    Uses the same inner product as the spectrum; the quadratic forms come
    from the pencil matrices so no extra solves are needed.
    """
    sp = enpspec.space
    M = sp.mass
    Kd = assemble_kdiv(enpspec.geometry)["Kdiv"].matrix
    AK = -M @ Kd @ enpspec.S.matrix
    AK = (AK + AK.T) / 2
    V = enpspec.eigenvectors
    kq = np.einsum("ij,ij->j", V, AK @ V)
    nq = np.einsum("ij,ij->j", V, enpspec.B @ V)
    e_int, e_ext = 0.5 * nq - kq, 0.5 * nq + kq
    return {"eigenvalue": enpspec.eigenvalues, "E_int": e_int, "E_ext": e_ext,
            "sum": e_int + e_ext}


def sample_cloud(geom, side, factors=None):
    """Scaled copies of the node set: interior {0.5, 0.8}, exterior {1.25, 2.0} by default.

    Meaningful for boundaries that are star-shaped about the origin.
    """
    if factors is None:
        factors = (0.5, 0.8) if side == "interior" else (1.25, 2.0)
    return np.vstack([f * geom.nodes for f in factors])


def membership(geom, f, upsample=4, factors=None):
    """Sampled |div| and |rot| of the harmonic extension on both sides, relative to max|f|."""
    scale = np.abs(_values(geom, f)).max()
    out = {}
    for side in ("interior", "exterior"):
        ev = laplace_extension(geom, f, side, upsample=upsample)
        _, div, rot = ev.evaluate(sample_cloud(geom, side, None if factors is None
                                               else factors[side]), derivatives=True)
        out[side] = {"div": float(np.abs(div).max() / scale),
                     "rot": float(np.abs(rot).max() / scale)}
    return out


def volume_energy(ev, n_radial=3, n_polar=None):
    """mu ||rot u||^2 + (mu / 2 k0) ||div u||^2 over the interior by volume quadrature.

    For a Lame evaluator on a surface star-shaped about the origin: x = rho X(p)
    with rho on a Gauss-Jacobi rule for the weight rho^2, and dV = rho^2 (X . nu) dA.
    """
    if ev.kind != "single_layer_lame":
        raise ValueError("needs a Lame single-layer evaluator")
    geom = ev.geometry
    if geom.m != 3 or not geom.sphere_like:
        raise ValueError("volume quadrature is implemented for sphere-like surfaces")
    g = geom if n_polar is None else geom.refined(n_polar)
    z, wz = roots_jacobi(n_radial, 0.0, 2.0)
    rho, wr = (z + 1) / 2, wz / 8            # int_0^1 rho^2 h(rho) drho
    cone = np.einsum("ij,ij->i", g.nodes, g.normals) * g.weights
    pts = (rho[:, None, None] * g.nodes[None]).reshape(-1, 3)
    w = (wr[:, None] * cone[None]).reshape(-1)
    _, div, rot = ev.evaluate(pts, derivatives=True)
    p = ev.params
    return float(p.mu * np.sum(w * np.sum(rot**2, 1)) + p.mu / (2 * p.k0) * np.sum(w * div**2))


def generator_family(geom, q, kind):
    """Boundary samples of the explicit families built from a harmonic polynomial q.

    ``kind``: "gradient" gives grad q (interior div- and rot-free extension),
    "kelvin_gradient" gives grad(q / |x|^(2k+1)) (exterior), and
    "tangential" gives S0[grad q x nu] (divergence-free on both sides).
    The origin must lie inside the boundary.
    """
    from .sphere_analytic import KelvinTransformed
    x = geom.nodes
    if kind == "gradient":
        v = q.gradient(x)
    elif kind == "kelvin_gradient":
        v = KelvinTransformed(q, 2 * q.degree + 1).gradient().evaluate(x)
    elif kind == "tangential":
        if geom.m != 3:
            raise ValueError("the tangential family is three-dimensional")
        g = np.cross(q.gradient(x), geom.normals)
        S0 = assemble_laplace_single(geom)
        v = np.stack([S0.apply(g[:, i]) for i in range(3)], 1)
    else:
        raise ValueError("kind must be 'gradient', 'kelvin_gradient' or 'tangential'")
    return np.asarray(v, float).reshape(-1)


def assemble_laplace_single(geom):
    from .operators import assemble_laplace
    return assemble_laplace(geom)["S0"]


def kdiv_eigen_residual(geom, params, f, target):
    """||K^div f - target f||_* / ||f||_* in the energy norm of ``params``."""
    S = assemble_single_layer(geom, params)
    star = StarInner(S)
    sp = S.space
    c = sp.project(_values(geom, f))
    r = assemble_kdiv(geom)["Kdiv"].matrix @ c - target * c
    return float(star.norm_coeffs(r) / star.norm_coeffs(c))
