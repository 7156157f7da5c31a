"""Lame parameters, Kelvin fundamental solution and pointwise boundary kernels.

All kernels follow the convention that the second argument ``y`` is the
integration (source) point and ``ny`` its outward unit normal.  Operator
kernels are returned as matrices acting on the density value ``f(y)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "LameParameters",
    "KernelValue",
    "derive_constants",
    "sphere_area",
    "kelvin_matrix",
    "singular_kernels",
    "traction_kernel",
    "divfree_traction_kernel",
]


@dataclass(frozen=True)
class LameParameters:
    """Isotropic elastic constants together with the derived quantities.

    ``k0 = mu / (2 (lam + 2 mu))`` and ``alpha1, alpha2 = (1 +- 2 k0) / (2 mu)``.
    """

    lam: float
    mu: float
    m: int
    k0: float
    alpha1: float
    alpha2: float

    def as_dict(self):
        return {"lambda": self.lam, "mu": self.mu, "m": self.m,
                "k0": self.k0, "alpha1": self.alpha1, "alpha2": self.alpha2}

    def scaled(self, c):
        """Parameters (c lam, c mu); k0 is unchanged."""
        return derive_constants(c * self.lam, c * self.mu, self.m, allow_general=True)


@dataclass(frozen=True)
class KernelValue:
    matrix: np.ndarray
    singularity_order: str  # "smooth", "weak" or "principal_value"


def derive_constants(lam, mu, m=3, allow_general=False):
    """Validate (lam, mu) for dimension ``m`` and return :class:`LameParameters`.

    Only m = 2, 3 have geometries downstream; ``allow_general=True`` admits
    any m >= 2 for pointwise formula evaluation.

    Raises
    ------
    ValueError
        If ``m`` is unsupported or strong convexity fails.
    """
    m = int(m)
    if m < 2 or (m > 3 and not allow_general):
        raise ValueError(f"dimension m must be 2 or 3, got {m}")
    lam = float(lam)
    mu = float(mu)
    if not (np.isfinite(lam) and np.isfinite(mu)):
        raise ValueError("Lame constants must be finite")
    if not mu > 0:
        raise ValueError(f"strong convexity violated: mu > 0 fails (mu = {mu})")
    if not m * lam + 2 * mu > 0:
        raise ValueError(
            f"strong convexity violated: m*lambda + 2*mu > 0 fails "
            f"({m}*{lam} + 2*{mu} = {m * lam + 2 * mu})")
    k0 = mu / (2.0 * (lam + 2.0 * mu))
    return LameParameters(lam, mu, m, k0, (1 + 2 * k0) / (2 * mu),
                          (1 - 2 * k0) / (2 * mu))


def sphere_area(m):
    """Surface area of the unit sphere in R^m (2 pi for m=2, 4 pi for m=3)."""
    return 2.0 * math.pi ** (m / 2.0) / math.gamma(m / 2.0)


def kelvin_matrix(x, params):
    """Kelvin matrix Gamma(x) for ``x`` of shape (..., m).

    For m = 2 the logarithmic form is used, for m >= 3 the algebraic one.
    """
    x = np.asarray(x, dtype=float)
    m = x.shape[-1]
    if m != params.m:
        raise ValueError(f"point dimension {m} does not match params.m = {params.m}")
    r = np.linalg.norm(x, axis=-1)
    if np.any(r == 0):
        raise ValueError("Kelvin matrix is singular at x = 0")
    eye = np.eye(m)
    xx = x[..., :, None] * x[..., None, :]
    om = sphere_area(m)
    r_ = r[..., None, None]
    if m == 2:
        return (params.alpha1 / om) * np.log(r_) * eye - (params.alpha2 / om) * xx / r_**2
    return (-params.alpha1 / ((m - 2) * om)) * eye / r_ ** (m - 2) \
        - (params.alpha2 / om) * xx / r_**m


def _prep(x, y, ny):
    x = np.asarray(x, float)
    y = np.asarray(y, float)
    ny = np.asarray(ny, float)
    d = x - y
    r = np.linalg.norm(d, axis=-1)
    if np.any(r == 0):
        raise ValueError("kernels are not defined for x = y")
    return d, r, ny


def singular_kernels(x, y, ny, params):
    """Kernels of S, K1, K2, K3 and the div-free double layer at (x, y).

    Returns a dict with keys ``kS, k1, k2, k3, kDdiv`` of :class:`KernelValue`.
    Works for any dimension ``m >= 2`` (shape (..., m) inputs broadcast).
    """
    d, r, ny = _prep(x, y, ny)
    m = d.shape[-1]
    om = sphere_area(m)
    r_ = r[..., None, None]
    dn = np.sum(d * ny, axis=-1)[..., None, None]
    eye = np.eye(m)
    outer_dn = d[..., :, None] * ny[..., None, :]
    k1 = (outer_dn - np.swapaxes(outer_dn, -1, -2)) / (om * r_**m)
    k2 = -dn * eye / (om * r_**m)
    k3 = dn * d[..., :, None] * d[..., None, :] / (om * r_ ** (m + 2))
    return {
        "kS": KernelValue(kelvin_matrix(d, params), "weak"),
        "k1": KernelValue(k1, "principal_value"),
        "k2": KernelValue(k2, "weak"),
        "k3": KernelValue(k3, "weak"),
        "kDdiv": KernelValue(-k1 + k2, "principal_value"),
    }


def enp_kernel(x, y, ny, params):
    """Composite kernel 2 k0 (k1 + k2) - m (1 - 2 k0) k3 of the eNP operator."""
    ks = singular_kernels(x, y, ny, params)
    m = np.shape(x)[-1]
    k0 = params.k0
    return 2 * k0 * (ks["k1"].matrix + ks["k2"].matrix) - m * (1 - 2 * k0) * ks["k3"].matrix


def _kelvin_column_gradient(z, params):
    """Jacobians J[k, i, j] = d/dz_j of (Gamma(z) e_k)_i, plus divergences."""
    z = np.asarray(z, float)
    m = z.shape[-1]
    om = sphere_area(m)
    r = np.linalg.norm(z, axis=-1)[..., None, None, None]
    eye = np.eye(m)
    zb = z[..., :, None, None]              # (z . e_k) indexed by k
    zi = z[..., None, :, None]
    zj = z[..., None, None, :]
    bi = eye[:, :, None]                    # (e_k)_i
    bj = eye[:, None, :]                    # (e_k)_j
    jac = (params.alpha1 / om) * bi * zj / r**m \
        - (params.alpha2 / om) * (bj * zi + zb * eye[None, :, :] - m * zb * zi * zj / r**2) / r**m
    div = (params.alpha1 - params.alpha2) / om * z / np.linalg.norm(z, axis=-1)[..., None] ** m
    return jac, div


def traction_kernel(x, y, ny, params):
    """eNP kernel computed directly from the traction of the Kelvin columns.

    The column ``k`` of the returned matrix's transpose is the traction
    lam (div u) n + mu (grad u + grad u^T) n at ``y`` of ``u = Gamma(y - x) e_k``.
    Used as an independent cross-check of :func:`enp_kernel`.
    """
    x = np.asarray(x, float)
    y = np.asarray(y, float)
    ny = np.asarray(ny, float)
    jac, div = _kelvin_column_gradient(y - x, params)
    sym = jac + np.swapaxes(jac, -1, -2)
    t = params.lam * div[..., :, None] * ny[..., None, :] \
        + params.mu * np.einsum("...kij,...j->...ki", sym, ny)
    # t[..., k, :] is the traction of column k, i.e. row k of the kernel
    return t


def divfree_traction_kernel(x, y, ny):
    """Div-free double-layer kernel from the closed form of the div-free
    conormal derivative of Gamma(z) b with z = y - x (3D only), transposed."""
    x = np.asarray(x, float)
    y = np.asarray(y, float)
    n = np.asarray(ny, float)
    z = y - x
    r3 = np.linalg.norm(z, axis=-1)[..., None, None] ** 3
    zn = np.sum(z * n, axis=-1)[..., None, None]
    # columns b = e_k : [(z.b) n - (n.b) z + (z.n) b] / (4 pi |z|^3)
    col = (n[..., :, None] * z[..., None, :] - z[..., :, None] * n[..., None, :]
           + zn * np.eye(3)) / (4 * np.pi * r3)
    return np.swapaxes(col, -1, -2)
