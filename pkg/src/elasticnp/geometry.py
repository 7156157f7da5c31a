"""Closed curves and surfaces carrying quadrature nodes, normals and weights.

Curves are sampled at uniform parameter values and integrated with the
trapezoid rule.  Surfaces diffeomorphic to the sphere are sampled on a
Gauss-Legendre (in cos theta) by uniform-azimuth grid of the parameter
sphere; the torus uses a doubly periodic trapezoid grid.  Every geometry
keeps its analytic chart so that operators can place extra quadrature
points anywhere on the boundary.
"""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "Curve2D",
    "Surface3D",
    "make_curve",
    "make_sphere_grid",
    "make_parametric_surface",
    "integrate",
    "enclosed_volume",
    "geometry_hash",
    "geometry_to_json",
    "geometry_from_json",
    "gauss_sphere_grid",
]

CURVE_KINDS = ("circle", "ellipse", "kite", "star")
SURFACE_KINDS = ("sphere", "spheroid", "star_radial", "torus")
DEFAULT_SHAPE_PARAMS = {
    "circle": (1.0,),
    "ellipse": (2.0, 1.0),
    "kite": (),
    "star": (0.3, 5),
    "sphere": (1.0,),
    "spheroid": (1.0, 1.3),
    "star_radial": (0.1, 2, 0),
    "torus": (2.0, 0.5),
}


# ---------------------------------------------------------------------------
# curves


def _curve_derivs(kind, params, t):
    """Return gamma, gamma', gamma'' at parameters ``t`` for a unit-scale curve."""
    c, s = np.cos(t), np.sin(t)
    if kind == "circle":
        (R,) = params
        g = R * np.c_[c, s]
        d1 = R * np.c_[-s, c]
        d2 = -g
    elif kind == "ellipse":
        a, b = params
        g = np.c_[a * c, b * s]
        d1 = np.c_[-a * s, b * c]
        d2 = np.c_[-a * c, -b * s]
    elif kind == "kite":
        g = np.c_[c + 0.65 * np.cos(2 * t) - 0.65, 1.5 * s]
        d1 = np.c_[-s - 1.3 * np.sin(2 * t), 1.5 * c]
        d2 = np.c_[-c - 2.6 * np.cos(2 * t), -1.5 * s]
    elif kind == "star":
        eps, p = params
        r = 1 + eps * np.cos(p * t)
        r1 = -eps * p * np.sin(p * t)
        r2 = -eps * p * p * np.cos(p * t)
        e = np.c_[c, s]
        ep = np.c_[-s, c]
        g = r[:, None] * e
        d1 = r1[:, None] * e + r[:, None] * ep
        d2 = r2[:, None] * e + 2 * r1[:, None] * ep - r[:, None] * e
    else:
        raise ValueError(f"unknown curve kind {kind!r}; expected one of {CURVE_KINDS}")
    return g, d1, d2


def _check_curve_params(kind, params):
    if kind == "circle":
        if len(params) != 1 or not params[0] > 0:
            raise ValueError("circle needs one positive radius")
    elif kind == "ellipse":
        if len(params) != 2 or not (params[0] > 0 and params[1] > 0):
            raise ValueError("ellipse needs semi-axes a, b > 0")
    elif kind == "kite":
        if len(params) != 0:
            raise ValueError("kite takes no shape parameters")
    elif kind == "star":
        if len(params) != 2:
            raise ValueError("star needs (eps, p)")
        eps, p = params
        if int(p) != p or p < 1:
            raise ValueError("star frequency p must be a positive integer")
        if not abs(eps) < 1:
            raise ValueError("star needs |eps| < 1 so that r(theta) > 0 (simple curve)")
    else:
        raise ValueError(f"unknown curve kind {kind!r}; expected one of {CURVE_KINDS}")


@dataclass(eq=False)
class Curve2D:
    """Smooth closed curve sampled at t_j = 2 pi j / N (counterclockwise)."""

    kind: str
    shape_params: tuple
    N: int
    scale: float
    t: np.ndarray
    nodes: np.ndarray
    d1: np.ndarray
    d2: np.ndarray
    speeds: np.ndarray
    tangents: np.ndarray
    normals: np.ndarray
    weights: np.ndarray
    m: int = field(default=2, init=False)

    @property
    def n_nodes(self):
        return self.N

    @property
    def resolution(self):
        return self.N

    def evaluate(self, t):
        """gamma, gamma', gamma'' (including the scale factor) at parameters t."""
        g, d1, d2 = _curve_derivs(self.kind, self.shape_params, np.asarray(t, float))
        return self.scale * g, self.scale * d1, self.scale * d2

    def curvature(self):
        cross = self.d1[:, 0] * self.d2[:, 1] - self.d1[:, 1] * self.d2[:, 0]
        return cross / self.speeds**3

    def scaled(self, factor):
        """Same curve with every point multiplied by ``factor``."""
        return make_curve(self.kind, self.shape_params, self.N, scale=self.scale * factor)

    def refined(self, N):
        return make_curve(self.kind, self.shape_params, N, scale=self.scale)


def make_curve(kind, shape_params=None, N=256, scale=1.0):
    """Build a :class:`Curve2D` from an analytic parametrization.

    Parameters
    ----------
    kind : {"circle", "ellipse", "kite", "star"}
    shape_params : sequence of float, optional
        circle: (R,); ellipse: (a, b); kite: (); star: (eps, p) for
        r(theta) = 1 + eps cos(p theta).  Defaults are used when omitted.
    N : int
        Number of nodes, even and at least 8.
    scale : float
        Uniform dilation factor applied to the curve.
    """
    if shape_params is None:
        shape_params = DEFAULT_SHAPE_PARAMS.get(kind, ())
    shape_params = tuple(float(p) for p in shape_params)
    if kind == "star":
        shape_params = (shape_params[0], int(shape_params[1]))
    _check_curve_params(kind, shape_params)
    N = int(N)
    if N < 8 or N % 2:
        raise ValueError(f"N must be even and >= 8, got {N}")
    if not scale > 0:
        raise ValueError("scale must be positive")
    t = 2 * np.pi * np.arange(N) / N
    g, d1, d2 = _curve_derivs(kind, shape_params, t)
    g, d1, d2 = scale * g, scale * d1, scale * d2
    speeds = np.linalg.norm(d1, axis=1)
    if np.any(speeds < 1e-12):
        raise ValueError("degenerate parametrization (zero speed)")
    tau = d1 / speeds[:, None]
    normals = np.c_[tau[:, 1], -tau[:, 0]]
    weights = 2 * np.pi / N * speeds
    area = 0.5 * np.sum(weights * np.sum(g * normals, axis=1))
    if not area > 0:
        raise ValueError("curve is not counterclockwise or encloses no area")
    return Curve2D(kind, shape_params, N, float(scale), t, g, d1, d2, speeds, tau,
                   normals, weights)


# ---------------------------------------------------------------------------
# surfaces


def gauss_sphere_grid(n_polar):
    """Gauss-Legendre (cos theta) x uniform azimuth grid on the unit sphere.

    Nodes are ordered ring by ring (polar index outer).  Returns unit
    vectors (2 n^2, 3), weights, and the polar angles / azimuths.
    """
    n = int(n_polar)
    xg, wg = np.polynomial.legendre.leggauss(n)
    theta = np.arccos(xg)
    phi = np.pi * np.arange(2 * n) / n
    T, P = np.meshgrid(theta, phi, indexing="ij")
    pts = np.stack([np.sin(T) * np.cos(P), np.sin(T) * np.sin(P), np.cos(T)], -1).reshape(-1, 3)
    w = np.repeat(wg, 2 * n) * (np.pi / n)
    return pts, w, theta, phi


class SphereChart:
    """Smooth embedding of the unit sphere: sphere, spheroid or radial star."""

    def __init__(self, kind, params):
        self.kind = kind
        self.params = tuple(params)
        if kind == "sphere":
            (R,) = self.params
            if not R > 0:
                raise ValueError("sphere radius must be positive")
        elif kind == "spheroid":
            a, c = self.params
            if not (a > 0 and c > 0):
                raise ValueError("spheroid semi-axes must be positive")
        elif kind == "star_radial":
            eps, deg, idx = self.params
            from .sphere_analytic import solid_harmonic_basis
            basis = solid_harmonic_basis(int(deg))
            if not 0 <= int(idx) < len(basis):
                raise ValueError(f"harmonic index must be in [0, {len(basis)})")
            self._harm = basis[int(idx)]
            pts, _, _, _ = gauss_sphere_grid(48)
            hmax = np.max(np.abs(self._harm.evaluate(pts)))
            self._hscale = 1.0 / hmax
            if not abs(eps) < 0.5:
                raise ValueError("star_radial needs |eps| < 0.5 to stay embedded")
        else:
            raise ValueError(f"unknown sphere-like kind {kind!r}")

    def evaluate(self, p):
        """Map unit vectors ``p`` (..., 3) to (points, unit normals, area factor)."""
        p = np.asarray(p, float)
        if self.kind == "sphere":
            (R,) = self.params
            return R * p, p.copy(), np.full(p.shape[:-1], R * R)
        if self.kind == "spheroid":
            a, c = self.params
            A = np.array([a, a, c])
            g = p / A
            gn = np.linalg.norm(g, axis=-1)
            return p * A, g / gn[..., None], a * a * c * gn
        eps, deg, _ = self.params
        deg = int(deg)
        s = eps * self._hscale
        h = self._harm.evaluate(p)
        gh = self._harm.gradient(p)
        rho = 1 + s * h
        grad_s = s * (gh - deg * h[..., None] * p)
        nv = rho[..., None] * p - grad_s
        nn = np.linalg.norm(nv, axis=-1)
        return rho[..., None] * p, nv / nn[..., None], rho * nn


class TorusChart:
    """Torus of revolution ((R + r cos v) cos u, (R + r cos v) sin u, r sin v)."""

    def __init__(self, R, r):
        if not (R > r > 0):
            raise ValueError("torus needs R > r > 0 (otherwise self-intersecting)")
        self.kind = "torus"
        self.params = (float(R), float(r))

    def evaluate(self, u, v):
        R, r = self.params
        u = np.asarray(u, float)
        v = np.asarray(v, float)
        cu, su, cv, sv = np.cos(u), np.sin(u), np.cos(v), np.sin(v)
        rad = R + r * cv
        X = np.stack([rad * cu, rad * su, r * sv], -1)
        n = np.stack([cv * cu, cv * su, sv], -1)
        return X, n, r * rad

    def derivatives(self, u, v):
        R, r = self.params
        cu, su, cv, sv = np.cos(u), np.sin(u), np.cos(v), np.sin(v)
        rad = R + r * cv
        Xu = np.stack([-rad * su, rad * cu, np.zeros_like(u)], -1)
        Xv = np.stack([-r * sv * cu, -r * sv * su, r * cv], -1)
        return Xu, Xv


@dataclass(eq=False)
class Surface3D:
    """Closed surface as node/normal/weight triples plus its chart."""

    kind: str
    shape_params: tuple
    n_polar: int
    nodes: np.ndarray
    normals: np.ndarray
    weights: np.ndarray
    chart: object
    param_nodes: np.ndarray
    param_weights: np.ndarray
    jacobian: np.ndarray
    patch_info: dict
    m: int = field(default=3, init=False)

    @property
    def n_nodes(self):
        return len(self.nodes)

    @property
    def resolution(self):
        return self.n_polar

    @property
    def sphere_like(self):
        return self.kind != "torus"

    def refined(self, n_polar):
        if self.kind == "sphere":
            return make_sphere_grid(n_polar, radius=self.shape_params[0])
        return make_parametric_surface(self.kind, self.shape_params, n_polar)


def _sphere_like_surface(kind, params, n_polar):
    n = int(n_polar)
    if n < 4:
        raise ValueError(f"n_polar must be >= 4, got {n}")
    chart = SphereChart(kind, params)
    pts, w, theta, phi = gauss_sphere_grid(n)
    X, nv, jac = chart.evaluate(pts)
    info = {"chart": "polar-azimuthal", "n_theta": n, "n_phi": 2 * n,
            "theta": theta, "phi": phi}
    return Surface3D(kind, tuple(params), n, X, nv, w * jac, chart, pts, w, jac, info)


def make_sphere_grid(n_polar, radius=1.0):
    """Sphere of the given radius on the n_polar x 2 n_polar product grid.

    With unit radius the rule integrates polynomials of total degree up to
    2 n_polar - 1 exactly.
    """
    return _sphere_like_surface("sphere", (float(radius),), n_polar)


def make_parametric_surface(kind, shape_params=None, n_polar=16):
    """Spheroid (a, c), radial star (eps, degree, index) or torus (R, r).

    The radial star is r(x) = 1 + eps h(x) with h a real solid harmonic of
    the given degree, rescaled to max |h| = 1 on the unit sphere.  The torus
    grid has 2 n_polar points around the axis and n_polar around the tube.
    """
    if shape_params is None:
        shape_params = DEFAULT_SHAPE_PARAMS[kind]
    shape_params = tuple(float(p) for p in shape_params)
    if kind in ("sphere", "spheroid", "star_radial"):
        if kind == "star_radial":
            shape_params = (shape_params[0], int(shape_params[1]), int(shape_params[2]))
        return _sphere_like_surface(kind, shape_params, n_polar)
    if kind != "torus":
        raise ValueError(f"unknown surface kind {kind!r}; expected one of {SURFACE_KINDS}")
    n = int(n_polar)
    if n < 4:
        raise ValueError(f"n_polar must be >= 4, got {n}")
    chart = TorusChart(*shape_params)
    nu, nv_ = 2 * n, n
    u = 2 * np.pi * np.arange(nu) / nu
    v = 2 * np.pi * np.arange(nv_) / nv_
    U, V = np.meshgrid(u, v, indexing="ij")
    X, nrm, jac = chart.evaluate(U.ravel(), V.ravel())
    pw = np.full(U.size, (2 * np.pi / nu) * (2 * np.pi / nv_))
    params_uv = np.c_[U.ravel(), V.ravel()]
    info = {"chart": "doubly-periodic", "n_u": nu, "n_v": nv_}
    return Surface3D("torus", shape_params, n, X, nrm, pw * jac, chart, params_uv, pw,
                     jac, info)


# ---------------------------------------------------------------------------
# helpers


def integrate(geom, samples):
    """Quadrature sum of nodal samples against the boundary weights."""
    samples = np.asarray(samples, float)
    if samples.shape[0] != len(geom.weights):
        raise ValueError(f"expected {len(geom.weights)} samples, got {samples.shape[0]}")
    return np.tensordot(geom.weights, samples, axes=(0, 0))


def enclosed_volume(geom):
    """Area (2D) or volume (3D) from the divergence theorem applied to x / m."""
    return integrate(geom, np.sum(geom.nodes * geom.normals, axis=1)) / geom.m


def geometry_hash(geom):
    h = hashlib.sha256()
    h.update(geom.kind.encode())
    h.update(json.dumps([float(p) for p in geom.shape_params]).encode())
    h.update(np.ascontiguousarray(np.round(geom.nodes, 12)).tobytes())
    h.update(np.ascontiguousarray(np.round(geom.weights, 12)).tobytes())
    return h.hexdigest()[:16]


def geometry_to_json(geom):
    d = {
        "kind": geom.kind,
        "shape_params": [float(p) for p in geom.shape_params],
        "dimension": geom.m,
        "resolution": geom.resolution,
        "hash": geometry_hash(geom),
        "nodes": geom.nodes.tolist(),
        "normals": geom.normals.tolist(),
        "weights": geom.weights.tolist(),
    }
    if geom.m == 2:
        d["scale"] = geom.scale
    return d


def geometry_from_json(d):
    """Rebuild a geometry from its JSON description and check the node data."""
    kind = d["kind"]
    if kind in CURVE_KINDS:
        g = make_curve(kind, d["shape_params"], d["resolution"], scale=d.get("scale", 1.0))
    elif kind == "sphere":
        g = make_sphere_grid(d["resolution"], radius=d["shape_params"][0])
    else:
        g = make_parametric_surface(kind, d["shape_params"], d["resolution"])
    if "nodes" in d:
        nodes = np.asarray(d["nodes"], float)
        if nodes.shape != g.nodes.shape or not np.allclose(nodes, g.nodes, atol=1e-10):
            raise ValueError("stored nodes do not match the rebuilt geometry")
    return g
