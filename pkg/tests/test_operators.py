import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import field
from elasticnp.geometry import make_curve
from elasticnp.operators import (BoundaryField, NonSPDError, StarInner, assemble_enp,
                                 assemble_k123, assemble_kdiv, assemble_laplace,
                                 assemble_single_layer, constant_action_residuals, export_operator,
                                 star_inner, symmetrization_residual)
from elasticnp.params_kernels import derive_constants

ROT = lambda P: np.c_[-P[:, 1], P[:, 0], 0 * P[:, 0]]                       # x cross grad(-z)
TANG2 = lambda P: np.c_[-P[:, 2] * P[:, 0], P[:, 2] * P[:, 1], P[:, 0]**2 - P[:, 1]**2]
GRAD_XY = lambda P: np.c_[P[:, 1], P[:, 0], 0 * P[:, 0]]
PLUS2 = lambda P: np.c_[-3 * P[:, 0] * P[:, 1], P[:, 0]**2 - 2 * P[:, 1]**2 + P[:, 2]**2,
                        -3 * P[:, 1] * P[:, 2]]


@pytest.mark.parametrize("kind,params", [("circle", None), ("ellipse", (2, 1)), ("kite", None)])
def test_constant_actions_planar(kind, params, p2):
    r = constant_action_residuals(make_curve(kind, params, N=256), p2)
    assert max(r.values()) <= 1e-8, r


def test_constant_actions_sphere(sphere16, p3):
    r = constant_action_residuals(sphere16, p3)
    assert max(r.values()) <= 1e-4, r


def test_planar_k3_constant_is_minus_quarter(ellipse256, p2):
    b = np.array([0.4, -1.1])
    f = np.tile(b, ellipse256.N)
    out = assemble_k123(ellipse256, p2)["K3"].apply(f)
    assert np.abs(out + f / 4).max() < 1e-10


@settings(max_examples=15, deadline=None)
@given(st.floats(0.2, 5.0), st.floats(-0.9, 5.0))
def test_constant_action_any_material(mu, t):
    p = derive_constants(t * mu, mu, 2)
    c = make_curve("ellipse", (1.5, 1.0), N=64)
    b = np.tile([1.0, -0.3], c.N)
    assert np.abs(assemble_enp(c, p)["K"].apply(b) - b / 2).max() < 1e-10


def test_kdiv_parameter_free(ellipse256):
    a = assemble_kdiv(ellipse256)["Kdiv"].matrix
    k = assemble_k123(ellipse256, derive_constants(2, 3, 2))
    assert np.array_equal(a, -k["K1"].matrix + k["K2"].matrix)


@pytest.mark.parametrize("fn,k", [(ROT, 1), (TANG2, 2)])
def test_single_layer_tangential_eigen(sphere16, p3, fn, k):
    f = field(sphere16, fn)
    Sf = assemble_single_layer(sphere16, p3).apply(f)
    assert np.abs(Sf + f / (p3.mu * (2 * k + 1))).max() <= 1e-6 * np.abs(f).max()


@pytest.mark.parametrize("fn,val", [(ROT, 0.5), (PLUS2, 1 / 6)])
def test_enp_sphere_eigenfields(sphere16, p3, fn, val):
    f = field(sphere16, fn)
    Kf = assemble_enp(sphere16, p3)["K"].apply(f)
    assert np.abs(Kf - val * f).max() <= 1e-8


@pytest.mark.parametrize("fn,val", [(GRAD_XY, 0.5), (ROT, -1 / 6), (TANG2, -1 / 10)])
def test_kdiv_sphere_eigenfields(sphere16, fn, val):
    f = field(sphere16, fn)
    assert np.abs(assemble_kdiv(sphere16)["Kdiv"].apply(f) - val * f).max() <= 1e-8


def test_laplace_np_on_circle_kills_mean_free():
    c = make_curve("circle", N=64)
    K0 = assemble_laplace(c)["K0"]
    assert np.abs(K0.apply(np.cos(c.t))).max() < 1e-13
    assert np.abs(K0.apply(np.ones(c.N)) - 0.5).max() < 1e-13


def test_weighted_single_layer_symmetry(ellipse256, p2):
    S = assemble_single_layer(ellipse256, p2)
    MS = S.space.mass @ S.matrix
    assert np.linalg.norm(MS - MS.T) / np.linalg.norm(MS) <= 1e-10


def test_star_inner_sphere(sphere16, p3):
    S = assemble_single_layer(sphere16, p3)
    f = field(sphere16, ROT)
    assert abs(star_inner(S, f, f) - 8 * np.pi) <= 1e-5 * 8 * np.pi
    assert abs(star_inner(S, f, field(sphere16, GRAD_XY))) <= 1e-10


def test_star_inner_symmetric(ellipse256, p2):
    g = ellipse256.scaled(1 / 16)
    star = StarInner(assemble_single_layer(g, p2))
    rng = np.random.default_rng(3)
    f, h = rng.standard_normal((2, 2 * g.N))
    scale = star.norm(f) * star.norm(h)
    assert abs(star.inner(f, h) - star.inner(h, f)) <= 1e-10 * scale
    assert star.inner(f, f) > 0


def test_star_inner_non_spd_hint(p2):
    with pytest.raises(NonSPDError, match="[Dd]ilat"):
        StarInner(assemble_single_layer(make_curve("kite", N=128), p2))


@pytest.mark.parametrize("geom,tol", [("circle", 1e-9), ("ellipse", 1e-8)])
def test_plemelj_planar(geom, tol, p2):
    c = make_curve(geom, (2, 1) if geom == "ellipse" else None, N=128 if geom == "circle" else 256)
    assert symmetrization_residual(c, p2) <= tol


def test_plemelj_sphere(sphere16, p3):
    assert symmetrization_residual(sphere16, p3) <= 1e-3


def test_adjoint_duality(ellipse256, p2):
    e = assemble_enp(ellipse256, p2)
    W = e["K"].space.mass
    rng = np.random.default_rng(0)
    phi, g = rng.standard_normal((2, 2 * ellipse256.N))
    lhs = (e["Kadj"].matrix @ phi) @ W @ g
    rhs = phi @ W @ (e["K"].matrix @ g)
    assert abs(lhs - rhs) <= 1e-12 * abs(lhs)


def test_boundary_field_validation(sphere8):
    with pytest.raises(ValueError):
        BoundaryField(sphere8, np.ones(5))
    v = np.ones(3 * sphere8.n_nodes)
    v[0] = np.nan
    with pytest.raises(ValueError):
        BoundaryField(sphere8, v)


def test_export_operator(tmp_path, sphere8, p3):
    op = assemble_single_layer(sphere8, p3)
    export_operator(op, tmp_path / "S.npy")
    assert np.array_equal(np.load(tmp_path / "S.npy"), op.matrix)
    side = json.loads((tmp_path / "S.json").read_text())
    assert side["op_tag"] == "S" and side["params"]["mu"] == 1.0 and "geometry_hash" in side
    export_operator(op, tmp_path / "S2", fmt="csv")
    assert np.allclose(np.loadtxt(tmp_path / "S2.csv", delimiter=","), op.matrix, rtol=1e-15)
