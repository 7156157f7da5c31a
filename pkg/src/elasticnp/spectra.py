"""Spectra of K and K^div in the energy inner product, clustering and decomposition.

Both operators are self-adjoint for <f, g>_* = -<S^-1 f, g>, so their
eigenpairs come from the symmetric-definite pencil

    A v = lambda B v,   A = -sym(M T S),   B = -sym(M S),

with T the operator and M the mass matrix.  Eigenvectors are densities
phi_j, B-orthonormal; the eigenfunctions are the traces f_j = S phi_j,
which are then orthonormal in <., .>_*.
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from .operators import (NonSPDError, assemble_enp, assemble_kdiv, assemble_single_layer,
                        _values)
from .params_kernels import derive_constants

__all__ = [
    "SpectralDecomposition",
    "ClusterReport",
    "generalized_spectrum",
    "enp_spectrum",
    "kdiv_spectrum",
    "cluster_eigenvalues",
    "enp_targets",
    "kdiv_targets",
    "decompose_field",
    "eigenfunction_localization",
    "spectrum_csv",
    "DEFAULT_DILATION",
]

DEFAULT_DILATION = 16.0


@dataclass(eq=False)
class SpectralDecomposition:
    """Eigenvalues (ascending), B-orthonormal density coefficients and metadata."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    B: np.ndarray
    op_tag: str = ""
    residuals: np.ndarray | None = None
    sym_defect: float = 0.0
    geometry: object = None
    space: object = None
    S: object = None
    params: object = None
    dilation: float = 1.0
    extra: dict = field(default_factory=dict)

    @property
    def trace_coeffs(self):
        """Eigenfunctions f_j = S phi_j in coefficient space (columns)."""
        return self.S.matrix @ self.eigenvectors

    @property
    def traces(self):
        """Eigenfunctions as nodal values (columns)."""
        return self.space.synthesize(self.trace_coeffs)

    def coordinates(self, f):
        """<f, f_j>_* for every eigenfunction, i.e. the expansion coefficients of f."""
        c = self.space.project(_values(self.geometry, f))
        phi = np.linalg.solve(self.S.matrix, c)
        return self.eigenvectors.T @ (self.B @ phi)


@dataclass
class ClusterReport:
    targets: dict
    tol: float
    assignment: list
    counts: dict
    outliers: list

    def as_dict(self):
        return {"targets": {k: float(v) for k, v in self.targets.items()}, "tol": self.tol,
                "counts": dict(self.counts), "n_outliers": len(self.outliers)}


def _cholesky_or_raise(B):
    c, info = sla.lapack.dpotrf(B, lower=1, clean=1)
    if info > 0:
        raise NonSPDError(f"B is not positive definite: factorization failed at pivot {info}")
    if info < 0:
        raise ValueError(f"invalid argument {-info} to the Cholesky routine")
    return c


def generalized_spectrum(A, B, sym_tol=1e-8, op_tag=""):
    """Solve A v = lambda B v for symmetric A and SPD B.

    Raises
    ------
    ValueError
        If A is not symmetric within ``sym_tol`` (relative).
    NonSPDError
        If the Cholesky factorization of B fails (the pivot index is reported).
    """
    A = np.asarray(A, float)
    B = np.asarray(B, float)
    nA = np.linalg.norm(A)
    defect = float(np.linalg.norm(A - A.T) / nA) if nA > 0 else 0.0
    if defect > sym_tol:
        raise ValueError(f"A is not symmetric (relative defect {defect:.2e} > {sym_tol:.0e})")
    A = (A + A.T) / 2
    B = (B + B.T) / 2
    _cholesky_or_raise(B)
    w, V = sla.eigh(A, B)
    res = np.linalg.norm(A @ V - (B @ V) * w[None, :], axis=0)
    scale = np.linalg.norm(A, 2) if nA > 0 else 1.0
    return SpectralDecomposition(w, V, B, op_tag, res / scale, defect)


def _pencil(T, S):
    M = S.space.mass
    MS = M @ S.matrix
    A = -M @ (T.matrix @ S.matrix)
    B = -(MS + MS.T) / 2
    defect = float(np.linalg.norm(A - A.T) / np.linalg.norm(A))
    return (A + A.T) / 2, B, defect


def _spd_single_layer(geom, params, auto_dilate, **opts):
    """Single layer with -S SPD, dilating a curve by 1/DEFAULT_DILATION when needed."""
    S = assemble_single_layer(geom, params, **opts)
    MS = S.space.mass @ S.matrix
    try:
        _cholesky_or_raise(-(MS + MS.T) / 2)
        return geom, S, 1.0
    except NonSPDError:
        if geom.m != 2 or not auto_dilate:
            raise NonSPDError("-S is not positive definite"
                              + ("; dilate the curve (planar.dilation_positivity, r = 16)"
                                 if geom.m == 2 else ""))
    g2 = geom.scaled(1.0 / DEFAULT_DILATION)
    S = assemble_single_layer(g2, params, **opts)
    return g2, S, DEFAULT_DILATION


def _spectrum(geom, params, which, auto_dilate=True, **opts):
    g, S, r = _spd_single_layer(geom, params, auto_dilate, **opts)
    T = assemble_enp(g, params, **opts)["K"] if which == "K" else assemble_kdiv(g, **opts)["Kdiv"]
    A, B, defect = _pencil(T, S)
    spec = generalized_spectrum(A, B, sym_tol=np.inf, op_tag=which)
    spec.sym_defect = defect
    spec.geometry, spec.space, spec.S, spec.params, spec.dilation = g, S.space, S, params, r
    return spec


def enp_spectrum(geom, params, auto_dilate=True, **opts):
    """Full eNP spectrum on ``geom``; curves are dilated if -S is not SPD.

    Eigenvalues are invariant under dilation, so ``spec.dilation`` only
    records which copy of the curve carried the inner product.
    """
    return _spectrum(geom, params, "K", auto_dilate, **opts)


def kdiv_spectrum(geom, params=None, auto_dilate=True, **opts):
    """Spectrum of K^div; the inner product uses ``params`` (default lambda = mu = 1)."""
    if params is None:
        params = derive_constants(1.0, 1.0, geom.m)
    return _spectrum(geom, params, "Kdiv", auto_dilate, **opts)


# ---------------------------------------------------------------------------
# clustering


def enp_targets(k0):
    return {"-k0": -k0, "0": 0.0, "+k0": k0}


def kdiv_targets():
    return {"-1/2": -0.5, "+1/2": 0.5}


def cluster_eigenvalues(eigs, targets, tol):
    """Nearest-target labels; eigenvalues farther than ``tol`` from all targets are outliers.

    ``targets`` is a dict label -> value or a sequence of values.  Ties go
    to the target of smaller magnitude.  For K^div pass the two targets
    +-1/2; eigenvalues away from both are labelled "middle" rather than
    outlier when ``targets`` contains the key "middle" with value None.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    if not isinstance(targets, dict):
        targets = {f"{float(t):g}": float(t) for t in targets}
    middle = "middle" in targets and targets["middle"] is None
    tg = {k: float(v) for k, v in targets.items() if v is not None}
    labels = list(tg)
    vals = np.array([tg[k] for k in labels])
    assignment, outliers = [], []
    counts = {k: 0 for k in labels}
    if middle:
        counts["middle"] = 0
    else:
        counts["outlier"] = 0
    for i, e in enumerate(np.asarray(eigs, float)):
        d = np.abs(vals - e)
        near = np.flatnonzero(d <= d.min() + 1e-15)
        j = near[np.argmin(np.abs(vals[near]))]
        if d[j] > tol:
            lab = "middle" if middle else "outlier"
            if not middle:
                outliers.append(i)
        else:
            lab = labels[j]
        assignment.append(lab)
        counts[lab] += 1
    return ClusterReport(tg, float(tol), assignment, counts, outliers)


def _kdiv_groups(kspec, tol):
    lam = kspec.eigenvalues
    minus = np.flatnonzero(np.abs(lam - 0.5) <= tol)     # Ker(K^div - 1/2): interior div-rot-free
    plus = np.flatnonzero(np.abs(lam + 0.5) <= tol)      # Ker(K^div + 1/2): exterior
    mid = np.setdiff1d(np.arange(len(lam)), np.concatenate([minus, plus]))
    return minus, plus, mid


def decompose_field(f, kdivspec, tol=0.02):
    """Split f into the +1/2 cluster part (f_minus), the -1/2 part (f_plus) and the rest.

    The parts are <., .>_*-orthogonal projections onto spans of K^div
    eigenfunctions; ``f_mid`` is defined as the remainder so the three
    parts sum to f exactly.
    """
    minus, plus, mid = _kdiv_groups(kdivspec, tol)
    if len(minus) == 0 or len(plus) == 0:
        raise ValueError("empty +-1/2 cluster; increase tol")
    v = _values(kdivspec.geometry, f)
    a = kdivspec.coordinates(v)
    F = kdivspec.trace_coeffs
    sp = kdivspec.space
    f_minus = sp.synthesize(F[:, minus] @ a[minus])
    f_plus = sp.synthesize(F[:, plus] @ a[plus])
    f_mid = v - f_minus - f_plus
    tot = float(np.sum(a**2))
    return {"f_minus": f_minus, "f_plus": f_plus, "f_mid": f_mid,
            "norms": {"total": np.sqrt(tot), "minus": float(np.linalg.norm(a[minus])),
                      "plus": float(np.linalg.norm(a[plus])), "mid": float(np.linalg.norm(a[mid]))}}


def eigenfunction_localization(enpspec, kdivspec, tol_cluster=0.02, enp_tol=0.05):
    """Relative deficits ||f_j - f_j^o||_*, ||f_j - f_j^+||_*, ||f_j - f_j^-||_* per eigenfunction.

    Both spectra must share the geometry and the inner product.  Returns a
    dict with a per-eigenfunction table and median deficits per eNP cluster.
    """
    if enpspec.geometry is not kdivspec.geometry:
        raise ValueError("spectra must live on the same geometry object")
    if not np.allclose(enpspec.B, kdivspec.B):
        raise ValueError("spectra must use the same inner product")
    C = kdivspec.eigenvectors.T @ (kdivspec.B @ enpspec.eigenvectors)
    minus, plus, mid = _kdiv_groups(kdivspec, tol_cluster)
    e_mid = np.sum(C[mid] ** 2, 0)
    e_plus = np.sum(C[plus] ** 2, 0)
    e_minus = np.sum(C[minus] ** 2, 0)
    total = e_mid + e_plus + e_minus
    d_o = np.sqrt(np.maximum(total - e_mid, 0) / total)
    d_p = np.sqrt(np.maximum(total - e_plus, 0) / total)
    d_m = np.sqrt(np.maximum(total - e_minus, 0) / total)
    lam = enpspec.eigenvalues
    k0 = enpspec.params.k0
    rep = cluster_eigenvalues(lam, enp_targets(k0), enp_tol)
    stats = {}
    for lab, dev in (("0", d_o), ("+k0", d_p), ("-k0", d_m)):
        sel = np.array([a == lab for a in rep.assignment])
        stats[lab] = {"count": int(sel.sum()),
                      "median_deficit": float(np.median(dev[sel])) if sel.any() else float("nan")}
    table = np.c_[lam, d_o, d_p, d_m]
    return {"table": table, "columns": ["eigenvalue", "deficit_mid", "deficit_plus", "deficit_minus"],
            "clusters": rep, "stats": stats}


def spectrum_csv(spec, report, nearest_exact=None, header=None):
    """RFC 4180 CSV text with columns index, eigenvalue, cluster, residual[, nearest_exact]."""
    buf = io.StringIO()
    if header:
        for k in sorted(header):
            buf.write(f"# {k}: {header[k]}\r\n")
    w = csv.writer(buf, lineterminator="\r\n")
    cols = ["index", "eigenvalue", "cluster", "residual"]
    if nearest_exact is not None:
        cols.append("nearest_exact")
    w.writerow(cols)
    for i, lam in enumerate(spec.eigenvalues):
        row = [i, f"{lam:.12e}", report.assignment[i],
               f"{spec.residuals[i]:.3e}" if spec.residuals is not None else ""]
        if nearest_exact is not None:
            row.append(f"{nearest_exact[i]:.12e}")
        w.writerow(row)
    return buf.getvalue()
