import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from elasticnp.params_kernels import (derive_constants, divfree_traction_kernel, enp_kernel,
                                      kelvin_matrix, singular_kernels, traction_kernel)

admissible3 = st.tuples(st.floats(0.05, 20.0), st.floats(-0.6, 20.0)).map(
    lambda t: (t[1] * t[0], t[0]))            # (lam, mu) with lam >= -0.6 mu > -2mu/3
vec3 = st.lists(st.floats(-2, 2), min_size=3, max_size=3).filter(
    lambda v: np.linalg.norm(v) > 0.1)


def test_unit_parameters():
    p = derive_constants(1, 1, 3)
    assert math.isclose(p.k0, 1 / 6, rel_tol=1e-15)
    assert math.isclose(p.alpha1, 2 / 3, rel_tol=1e-15)
    assert math.isclose(p.alpha2, 1 / 3, rel_tol=1e-15)


@pytest.mark.parametrize("lam,mu,m,needle", [(-1, 1, 3, "m*lambda + 2*mu"),
                                              (1, 0, 3, "mu > 0"),
                                              (1, -2, 2, "mu > 0"),
                                              (1, 1, 5, "dimension")])
def test_rejects_inadmissible(lam, mu, m, needle):
    with pytest.raises(ValueError, match="dimension" if needle == "dimension" else "convexity"):
        derive_constants(lam, mu, m)
    try:
        derive_constants(lam, mu, m)
    except ValueError as exc:
        assert needle in str(exc)


def test_incompressible_limit():
    p = derive_constants(1e6, 1, 3)
    assert 0 < p.k0 < 1e-6


@settings(max_examples=60, deadline=None)
@given(admissible3)
def test_derived_constant_relations(lm):
    lam, mu = lm
    p = derive_constants(lam, mu, 3)
    assert 0 < p.k0 < 0.5
    assert p.alpha1 > p.alpha2 > 0
    assert math.isclose(p.alpha1 + p.alpha2, 1 / mu, rel_tol=1e-12)
    assert math.isclose(p.alpha1 - p.alpha2, 2 * p.k0 / mu, rel_tol=1e-12)


def test_kelvin_axis_values():
    G = kelvin_matrix(np.array([1.0, 0, 0]), derive_constants(1, 1, 3))
    assert np.allclose(np.diag(G), [-1 / (4 * np.pi), -1 / (6 * np.pi), -1 / (6 * np.pi)], atol=1e-15)
    assert np.allclose(G - np.diag(np.diag(G)), 0)


def test_kelvin_planar_unit_circle():
    p = derive_constants(0.7, 1.3, 2)
    x = np.array([0.6, 0.8])
    assert np.allclose(kelvin_matrix(x, p), -p.alpha2 * np.outer(x, x) / (2 * np.pi), atol=1e-15)


def test_kelvin_origin_rejected():
    with pytest.raises(ValueError):
        kelvin_matrix(np.zeros(3), derive_constants(1, 1, 3))


@settings(max_examples=60, deadline=None)
@given(vec3, admissible3)
def test_kelvin_even_and_symmetric(x, lm):
    p = derive_constants(*lm, 3)
    x = np.array(x)
    G = kelvin_matrix(x, p)
    assert np.allclose(G, G.T, rtol=1e-14, atol=0)
    assert np.allclose(G, kelvin_matrix(-x, p), rtol=1e-14, atol=0)


def test_kernel_components_on_axis():
    h = 0.5
    ks = singular_kernels(np.array([h, 0, 0]), np.zeros(3), np.array([1.0, 0, 0]),
                          derive_constants(1, 1, 3))
    assert np.allclose(ks["k2"].matrix, -np.eye(3) / (4 * np.pi * h**2))
    assert np.allclose(ks["k3"].matrix, np.diag([1, 0, 0]) / (4 * np.pi * h**2))
    assert ks["k1"].singularity_order == "principal_value"
    assert ks["k3"].singularity_order == "weak"


def _fd_conormal(x, y, n, p, h=1e-5):
    """Oracle: traction of Kelvin columns by central differences of the Kelvin matrix."""
    m = len(x)
    J = np.zeros((m, m, m))          # J[k, i, j] = d/dy_j Gamma(y - x)[i, k]
    for j in range(m):
        e = np.zeros(m)
        e[j] = h
        J[:, :, j] = ((kelvin_matrix(y + e - x, p) - kelvin_matrix(y - e - x, p)) / (2 * h)).T
    out = np.zeros((m, m))
    for k in range(m):
        grad = J[k]
        out[k] = p.lam * np.trace(grad) * n + p.mu * (grad + grad.T) @ n
    return out


@settings(max_examples=40, deadline=None)
@given(vec3, vec3, admissible3)
def test_enp_kernel_matches_differentiated_kelvin(d, nrm, lm):
    p = derive_constants(*lm, 3)
    y = np.zeros(3)
    x = np.array(d)
    n = np.array(nrm) / np.linalg.norm(nrm)
    K = enp_kernel(x, y, n, p)
    assert np.allclose(K, traction_kernel(x, y, n, p), rtol=1e-11, atol=1e-13 * np.abs(K).max())
    assert np.allclose(K, _fd_conormal(x, y, n, p), rtol=1e-6, atol=1e-7 * np.abs(K).max())


@settings(max_examples=40, deadline=None)
@given(vec3, vec3)
def test_divfree_kernel_closed_form_and_parameter_free(d, nrm):
    x, n = np.array(d), np.array(nrm) / np.linalg.norm(nrm)
    a = singular_kernels(x, np.zeros(3), n, derive_constants(1, 1, 3))["kDdiv"].matrix
    b = singular_kernels(x, np.zeros(3), n, derive_constants(2, 3, 3))["kDdiv"].matrix
    assert np.array_equal(a, b)
    assert np.allclose(a, divfree_traction_kernel(x, np.zeros(3), n), rtol=1e-12,
                       atol=1e-14 * np.abs(a).max())


def test_planar_enp_kernel_matches_differentiated_kelvin():
    p = derive_constants(0.5, 1.5, 2)
    x, n = np.array([0.7, -0.3]), np.array([0.6, 0.8])
    assert np.allclose(enp_kernel(x, np.zeros(2), n, p), _fd_conormal(x, np.zeros(2), n, p),
                       rtol=1e-6, atol=1e-8)
