"""Dense discretizations of the Lame single layer, the eNP operator and its parts.

Every operator is stored as a matrix on a coefficient space together with
maps to and from nodal values:

* curves and the torus use nodal values directly (mass matrix = weights);
* sphere-like surfaces use vector spherical-harmonic coefficients of
  degree <= n_polar - 1 (mass matrix = Gram matrix in L2 of the surface).

``DiscreteOperator.apply`` always takes and returns node-major nodal
vectors of length m * n_nodes.  Parameter-free blocks are cached per
geometry object.
"""
from __future__ import annotations

import json
import threading
import weakref
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .geometry import Curve2D, geometry_hash
from .params_kernels import LameParameters
from . import quadrature2d as q2
from .quadrature3d import HarmonicGalerkin, TorusNystrom

__all__ = [
    "NumericalError",
    "NonSPDError",
    "BoundaryField",
    "Discretization",
    "DiscreteOperator",
    "get_discretization",
    "sample_field",
    "constant_field",
    "assemble_single_layer",
    "assemble_laplace",
    "assemble_k123",
    "assemble_enp",
    "assemble_kdiv",
    "adjoint",
    "StarInner",
    "star_inner",
    "symmetrization_residual",
    "constant_action_residuals",
    "export_operator",
]

OP_TAGS = ("S", "K", "Kadj", "Kdiv", "Kdivadj", "K1", "K2", "K3", "S0", "K0")


class NumericalError(RuntimeError):
    """A numerical step failed (distinct from bad input)."""


class NonSPDError(NumericalError):
    """-S is not positive definite on the discrete space."""


@dataclass(eq=False)
class BoundaryField:
    """Node-major stacked samples of an m-vector field on a geometry."""

    geometry: object
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, float).ravel()
        m = self.geometry.m
        if v.size != m * self.geometry.n_nodes:
            raise ValueError(f"field length {v.size} does not match {m} x {self.geometry.n_nodes} nodes")
        if not np.all(np.isfinite(v)):
            raise ValueError("field has non-finite entries")
        self.values = v

    @property
    def geom_id(self):
        return geometry_hash(self.geometry)

    def as_array(self):
        return self.values.reshape(-1, self.geometry.m)


def _values(geom, f):
    if isinstance(f, BoundaryField):
        if f.geometry is not geom and f.geom_id != geometry_hash(geom):
            raise ValueError("field lives on a different geometry")
        return f.values
    v = np.asarray(f, float)
    n, m = geom.n_nodes, geom.m
    if v.ndim >= 2 and v.shape[:2] == (n, m):
        v = v.reshape(n * m, *v.shape[2:])
    if v.shape[0] != m * n:
        raise ValueError(f"expected {geom.m * geom.n_nodes} values, got {v.shape[0]}")
    return v


def sample_field(geom, func):
    """Evaluate ``func(points (n, m)) -> (n, m)`` at the nodes."""
    return BoundaryField(geom, np.asarray(func(geom.nodes), float).reshape(-1))


def constant_field(geom, b):
    return BoundaryField(geom, np.tile(np.asarray(b, float), geom.n_nodes))


class Discretization:
    """Coefficient space, mass matrix and parameter-free blocks for one geometry."""

    def __init__(self, geom, **opts):
        self.geometry = geom
        self.m = geom.m
        self.opts = opts
        if isinstance(geom, Curve2D):
            self.kind = "nodal"
            cd = q2.CurveData(geom)
            self.S0 = q2.laplace_single_layer(cd)
            self.B = q2.dyadic_single_layer(cd)
            self.K1 = q2.k1_block(cd)
            self.K0 = q2.k2_scalar(cd)
            self.K3 = q2.k3_block(cd)
            self.curve_data = cd
        elif geom.sphere_like:
            self.kind = "harmonic"
            g = HarmonicGalerkin(geom, **opts)
            self.galerkin = g
            for k in ("S0", "B", "K1", "K0", "K3"):
                setattr(self, k, getattr(g, k))
        else:
            self.kind = "nodal"
            g = TorusNystrom(geom, **opts)
            for k in ("S0", "B", "K1", "K0", "K3"):
                setattr(self, k, getattr(g, k))
        self.K2 = np.kron(self.K0, np.eye(self.m))
        if self.kind == "nodal":
            self.mass_diag = np.repeat(geom.weights, self.m)
            self.mass = np.diag(self.mass_diag)
            self.mass_scalar = np.diag(geom.weights)
        else:
            self.mass = self.galerkin.mass
            self.mass_scalar = self.galerkin.Mscal
        self.n_dof = self.S0.shape[0] * self.m

    def project(self, values, scalar=False):
        if self.kind == "nodal":
            return np.asarray(values, float)
        if scalar:
            g = self.galerkin
            v = np.asarray(values, float)
            return np.tensordot(g.Y * g._Wp[:, None], v, axes=(0, 0))
        return self.galerkin.project(values)

    def synthesize(self, coeffs, scalar=False):
        if self.kind == "nodal":
            return np.asarray(coeffs, float)
        if scalar:
            return np.tensordot(self.galerkin.Y, np.asarray(coeffs, float), axes=(1, 0))
        return self.galerkin.synthesize(coeffs)

    def solve_mass(self, x, scalar=False):
        if self.kind == "nodal":
            d = self.geometry.weights if scalar else self.mass_diag
            return x / (d if x.ndim == 1 else d[:, None])
        return np.linalg.solve(self.mass_scalar if scalar else self.mass, x)


_CACHE = weakref.WeakKeyDictionary()
_CACHE_LOCK = threading.Lock()


def get_discretization(geom, **opts):
    """Cached :class:`Discretization` for ``geom`` (keyed by object and options)."""
    key = tuple(sorted(opts.items()))
    with _CACHE_LOCK:
        per = _CACHE.setdefault(geom, {})
        if key not in per:
            per[key] = Discretization(geom, **opts)
        return per[key]


@dataclass(eq=False)
class DiscreteOperator:
    """Dense operator on a discretization's coefficient space."""

    matrix: np.ndarray
    op_tag: str
    geometry: object
    space: Discretization
    params: LameParameters | None = None
    scalar: bool = False

    def __post_init__(self):
        if self.op_tag not in OP_TAGS:
            raise ValueError(f"unknown op_tag {self.op_tag!r}")

    @property
    def geom_id(self):
        return geometry_hash(self.geometry)

    def apply(self, f):
        """Apply to nodal values (or a BoundaryField); returns nodal values."""
        if self.scalar:
            v = np.asarray(f.values if isinstance(f, BoundaryField) else f, float)
        else:
            v = _values(self.geometry, f)
        c = self.space.project(v, scalar=self.scalar)
        return self.space.synthesize(self.matrix @ c, scalar=self.scalar)

    __call__ = apply

    def sidecar(self):
        d = {"op_tag": self.op_tag, "geometry_hash": self.geom_id,
             "geometry_kind": self.geometry.kind,
             "resolution": self.geometry.resolution,
             "space": self.space.kind, "shape": list(self.matrix.shape)}
        if self.params is not None:
            d["params"] = self.params.as_dict()
        return d


def _op(matrix, tag, geom, space, params=None, scalar=False):
    return DiscreteOperator(matrix, tag, geom, space, params, scalar)


def _check_params(geom, params):
    if not isinstance(params, LameParameters):
        raise TypeError("params must be LameParameters (see derive_constants)")
    if params.m != geom.m:
        raise ValueError(f"params are for m = {params.m}, geometry has m = {geom.m}")


def assemble_single_layer(geom, params, **opts):
    """Lame single layer S = alpha1 (S0 x I) + alpha2 B."""
    _check_params(geom, params)
    sp = get_discretization(geom, **opts)
    S = params.alpha1 * np.kron(sp.S0, np.eye(geom.m)) + params.alpha2 * sp.B
    return _op(S, "S", geom, sp, params)


def assemble_laplace(geom, **opts):
    """Scalar Laplace single layer S0 and double layer K0."""
    sp = get_discretization(geom, **opts)
    return {"S0": _op(sp.S0, "S0", geom, sp, scalar=True),
            "K0": _op(sp.K0, "K0", geom, sp, scalar=True)}


def assemble_k123(geom, params=None, **opts):
    sp = get_discretization(geom, **opts)
    return {"K1": _op(sp.K1, "K1", geom, sp, params),
            "K2": _op(sp.K2, "K2", geom, sp, params),
            "K3": _op(sp.K3, "K3", geom, sp, params)}


def adjoint(op, tag=None):
    """Weight-conjugate transpose M^-1 T^T M."""
    sp = op.space
    A = sp.solve_mass(op.matrix.T @ sp.mass)
    return _op(A, tag or (op.op_tag + "adj"), op.geometry, sp, op.params)


def assemble_enp(geom, params, **opts):
    """K = 2 k0 (K1 + K2) - m (1 - 2 k0) K3 and its weighted adjoint."""
    _check_params(geom, params)
    sp = get_discretization(geom, **opts)
    k0 = params.k0
    K = 2 * k0 * (sp.K1 + sp.K2) - geom.m * (1 - 2 * k0) * sp.K3
    op = _op(K, "K", geom, sp, params)
    return {"K": op, "Kadj": adjoint(op, "Kadj")}


def assemble_kdiv(geom, **opts):
    """Div-free operator K^div = -K1 + K2 (no Lame dependence)."""
    sp = get_discretization(geom, **opts)
    op = _op(-sp.K1 + sp.K2, "Kdiv", geom, sp)
    return {"Kdiv": op, "Kdivadj": adjoint(op, "Kdivadj")}


class StarInner:
    """Energy inner product <f, g>_* = -<S^-1 f, g> with a cached factorization.

    With B = -sym(M S) (SPD when the inner product is genuine),
    <f, g>_* = f^T M B^-1 M g in coefficient space.
    """

    def __init__(self, S):
        self.S = S
        self.space = S.space
        MS = self.space.mass @ S.matrix
        self.sym_defect = float(np.linalg.norm(MS - MS.T) / np.linalg.norm(MS))
        self.B = -(MS + MS.T) / 2
        self._lock = threading.Lock()
        try:
            self._chol = sla.cho_factor(self.B, lower=True)
        except np.linalg.LinAlgError as exc:
            hint = (" Dilate the curve (planar.dilation / scale 1/16) so that -S becomes "
                    "positive definite." if S.geometry.m == 2 else "")
            raise NonSPDError(f"-S is not positive definite on this discretization ({exc})." + hint) from exc

    def coeffs(self, f):
        return self.space.project(_values(self.S.geometry, f))

    def inner_coeffs(self, a, b):
        M = self.space.mass
        with self._lock:
            x = sla.cho_solve(self._chol, M @ b)
        r = (M @ a).T @ x
        return float(r) if np.ndim(r) == 0 else r

    def inner(self, f, g):
        return self.inner_coeffs(self.coeffs(f), self.coeffs(g))

    def norm(self, f):
        return float(np.sqrt(max(self.inner(f, f), 0.0)))

    def norm_coeffs(self, a):
        return float(np.sqrt(max(self.inner_coeffs(a, a), 0.0)))


def star_inner(S, f, g):
    """<f, g>_* for boundary fields; raises NonSPDError when -S is not SPD."""
    return StarInner(S).inner(f, g)


def _rel(A, S):
    return float(np.linalg.norm(A, 2) / np.linalg.norm(S, 2))


def symmetrization_residual(geom, params, detail=False, **opts):
    """max(||K S - S K*||, ||Kdiv S - S Kdiv*||) / ||S|| in the spectral norm."""
    S = assemble_single_layer(geom, params, **opts).matrix
    e = assemble_enp(geom, params, **opts)
    d = assemble_kdiv(geom, **opts)
    rK = _rel(e["K"].matrix @ S - S @ e["Kadj"].matrix, S)
    rD = _rel(d["Kdiv"].matrix @ S - S @ d["Kdivadj"].matrix, S)
    if detail:
        return {"K": rK, "Kdiv": rD, "max": max(rK, rD)}
    return max(rK, rD)


def constant_action_residuals(geom, params, b=None, **opts):
    """Sup-norm defects of K b = b/2, K1 b = 0, K2 b = b/2, K3 b = -b/(2m), Kdiv b = b/2."""
    m = geom.m
    b = np.asarray(b if b is not None else np.linspace(0.3, -0.7, m), float)
    f = constant_field(geom, b).values
    e = assemble_enp(geom, params, **opts)["K"]
    k = assemble_k123(geom, params, **opts)
    d = assemble_kdiv(geom, **opts)["Kdiv"]
    scale = np.abs(b).max()
    return {
        "K": float(np.abs(e.apply(f) - f / 2).max() / scale),
        "K1": float(np.abs(k["K1"].apply(f)).max() / scale),
        "K2": float(np.abs(k["K2"].apply(f) - f / 2).max() / scale),
        "K3": float(np.abs(k["K3"].apply(f) + f / (2 * m)).max() / scale),
        "Kdiv": float(np.abs(d.apply(f) - f / 2).max() / scale),
    }


def export_operator(op, path, fmt="npy"):
    """Write the matrix (npy or csv) and a JSON sidecar next to it."""
    path = str(path)
    if fmt == "npy":
        np.save(path if path.endswith(".npy") else path + ".npy", op.matrix)
    elif fmt == "csv":
        np.savetxt(path if path.endswith(".csv") else path + ".csv", op.matrix,
                   delimiter=",", fmt="%.17g")
    else:
        raise ValueError("fmt must be 'npy' or 'csv'")
    base = path.rsplit(".", 1)[0] if path.endswith((".npy", ".csv")) else path
    with open(base + ".json", "w", encoding="utf-8") as fh:
        json.dump(op.sidecar(), fh, indent=2, sort_keys=True)
