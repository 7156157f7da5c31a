"""Planar tools: Cauchy transform, the K^div / conjugate-Cauchy identity,
the two-way decomposition of boundary fields and dilation positivity of -S.

A planar vector (v1, v2) is identified with the complex number v1 + i v2.
Under this identification K^div f = conj(C conj(f)), where C is the
principal-value Cauchy transform on the curve, so in 2D the div-free
operator is an involution up to the factor 2.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from . import quadrature2d as q2
from .geometry import Curve2D
from .operators import _values, assemble_kdiv, assemble_single_layer, get_discretization

__all__ = [
    "ComplexBoundaryFunction",
    "cauchy_matrix",
    "conj_cauchy_real",
    "cauchy_integral",
    "kdiv_cauchy_residual",
    "involution_residual",
    "decompose2d",
    "dilation_positivity",
]

_J = np.array([[0.0, -1.0], [1.0, 0.0]])


@dataclass(eq=False)
class ComplexBoundaryFunction:
    """One complex value per curve node."""

    curve: Curve2D
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, complex).ravel()
        if v.size != self.curve.n_nodes:
            raise ValueError(f"expected {self.curve.n_nodes} values, got {v.size}")
        if not np.all(np.isfinite(v)):
            raise ValueError("non-finite entries")
        self.values = v

    @classmethod
    def from_real(cls, curve, f):
        v = _values(curve, f).reshape(-1, 2)
        return cls(curve, v[:, 0] + 1j * v[:, 1])

    def to_real(self):
        """Node-major stacked (re, im) pairs."""
        return np.c_[self.values.real, self.values.imag].ravel()

    def conj(self):
        return ComplexBoundaryFunction(self.curve, self.values.conj())


def _check_curve(curve):
    if not isinstance(curve, Curve2D):
        raise TypeError("a planar curve is required")
    if curve.N % 2:
        raise ValueError("the alternating-point rule needs an even node count")


def cauchy_matrix(curve):
    """Dense principal-value Cauchy transform (1/2 pi i) p.v. int f(w) / (w - z) dw."""
    _check_curve(curve)
    return q2.cauchy_matrix(get_discretization(curve).curve_data)


def conj_cauchy_real(curve, C=None):
    """Real 2N x 2N matrix of f -> conj(C conj(f)) on node-major stacked pairs."""
    if C is None:
        C = cauchy_matrix(curve)
    Cb = C.conj()
    return np.kron(Cb.real, np.eye(2)) + np.kron(Cb.imag, _J)


def cauchy_integral(curve, g, z):
    """(1/2 pi i) int g(w) / (w - z) dw at points ``z`` off the curve (trapezoid rule)."""
    g = g.values if isinstance(g, ComplexBoundaryFunction) else np.asarray(g, complex)
    z = np.atleast_1d(np.asarray(z, complex))
    w = curve.nodes[:, 0] + 1j * curve.nodes[:, 1]
    dw = (curve.d1[:, 0] + 1j * curve.d1[:, 1]) * (2 * np.pi / curve.N)
    diff = w[None, :] - z[:, None]
    if np.any(np.abs(diff) < 1e-14):
        raise ValueError("evaluation point coincides with a node")
    return (diff ** -1 * (g * dw)[None, :]).sum(1) / (2j * np.pi)


def kdiv_cauchy_residual(curve):
    """Spectral-norm distance between K^div and conj o C o conj on the same nodes."""
    _check_curve(curve)
    Kd = assemble_kdiv(curve)["Kdiv"].matrix
    return float(np.linalg.norm(Kd - conj_cauchy_real(curve), 2))


def involution_residual(curve, which="kdiv"):
    """||(2T)^2 - I|| in spectral norm for T = K^div or T = C."""
    _check_curve(curve)
    if which == "kdiv":
        T = assemble_kdiv(curve)["Kdiv"].matrix
    elif which == "cauchy":
        T = cauchy_matrix(curve)
    else:
        raise ValueError("which must be 'kdiv' or 'cauchy'")
    return float(np.linalg.norm(4 * T @ T - np.eye(T.shape[0]), 2))


def decompose2d(curve, f):
    """Split f = f_minus + f_plus with the conjugated Cauchy projectors.

    f_minus = conj((C + 1/2) conj f) = (K^div + 1/2) f extends inside as a
    div- and rot-free field; f_plus = -(K^div - 1/2) f extends outside.
    """
    _check_curve(curve)
    v = _values(curve, f)
    T = conj_cauchy_real(curve)
    f_minus = T @ v + 0.5 * v
    f_plus = v - f_minus
    return {"f_minus": f_minus, "f_plus": f_plus}


def dilation_positivity(curve, r, params, operator="lame"):
    """Positivity of -S on the curve shrunk by 1/r.

    Returns ``spd`` (Cholesky success), ``min_eig`` (smallest eigenvalue of
    -sym(M S) relative to the mass matrix on the shrunk curve) and
    ``mean_mode_min_eig``: the smallest value of the energy form restricted
    to constant densities, with densities rescaled by r so that they are
    measured against the arclength of the original curve.  The last one is
    the quantity that grows like ln r.

    ``operator="laplace"`` uses the scalar log kernel alone.
    """
    _check_curve(curve)
    if not r > 0:
        raise ValueError("r must be positive")
    g = curve.scaled(1.0 / r)
    sp = get_discretization(g)
    if operator == "lame":
        S = assemble_single_layer(g, params).matrix
        M = sp.mass
        E = np.tile(np.eye(2), (g.N, 1))
    elif operator == "laplace":
        S = sp.S0
        M = sp.mass_scalar
        E = np.ones((g.N, 1))
    else:
        raise ValueError("operator must be 'lame' or 'laplace'")
    MS = M @ S
    B = -(MS + MS.T) / 2
    _, info = sla.lapack.dpotrf(B, lower=1)
    min_eig = float(sla.eigh(B, M, eigvals_only=True, subset_by_index=[0, 0])[0])
    length = float(curve.weights.sum())
    G = r**2 * (E.T @ B @ E) / length
    mean_min = float(np.linalg.eigvalsh((G + G.T) / 2)[0])
    return {"r": float(r), "spd": bool(info == 0), "min_eig": min_eig,
            "mean_mode_min_eig": mean_min}
