import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from elasticnp.geometry import make_curve
from elasticnp.params_kernels import derive_constants
from elasticnp.operators import StarInner, assemble_single_layer
from elasticnp.planar import (ComplexBoundaryFunction, cauchy_integral, cauchy_matrix,
                              conj_cauchy_real, decompose2d, dilation_positivity, involution_residual,
                              kdiv_cauchy_residual)
from elasticnp.spectra import cluster_eigenvalues, enp_spectrum

CURVES = [("circle", None), ("ellipse", (2.0, 1.0)), ("kite", None)]


def test_complex_function_roundtrip():
    c = make_curve("circle", N=16)
    f = np.arange(32.0)
    z = ComplexBoundaryFunction.from_real(c, f)
    assert np.array_equal(z.to_real(), f)
    assert np.array_equal(z.conj().values, z.values.conj())
    with pytest.raises(ValueError):
        ComplexBoundaryFunction(c, np.ones(5))
    with pytest.raises(ValueError):
        ComplexBoundaryFunction(c, np.full(16, np.inf))


def test_cauchy_on_circle_modes():
    # C z^n = z^n / 2 for n >= 0 and -z^n / 2 for n < 0 on the unit circle
    c = make_curve("circle", N=64)
    z = np.exp(1j * c.t)
    C = cauchy_matrix(c)
    for n in (0, 1, 3, -1, -4):
        assert np.abs(C @ z**n - np.sign(n + 0.5) * z**n / 2).max() < 1e-12


def test_cauchy_integral_off_curve():
    c = make_curve("ellipse", (2.0, 1.0), N=128)
    w = c.nodes[:, 0] + 1j * c.nodes[:, 1]
    # holomorphic inside: reproduced inside, zero outside
    z = 0.3 + 0.2j
    g = w**2 + 1 / (w - 3)
    assert abs(cauchy_integral(c, g, z)[0] - (z**2 + 1 / (z - 3))) < 1e-10
    assert abs(cauchy_integral(c, g, 5.0)[0]) < 1e-10
    # decaying holomorphic outside: minus itself outside
    assert abs(cauchy_integral(c, 1 / w, 5.0)[0] + 1 / 5) < 1e-10
    with pytest.raises(ValueError):
        cauchy_integral(c, g, w[3])


@pytest.mark.parametrize("kind,params", CURVES)
def test_kdiv_equals_conjugate_cauchy(kind, params):
    c = make_curve(kind, params, N=256)
    assert kdiv_cauchy_residual(c) <= 1e-8
    assert involution_residual(c, "kdiv") <= 1e-8
    assert involution_residual(c, "cauchy") <= 1e-8


def test_conj_cauchy_real_matches_complex():
    c = make_curve("kite", N=64)
    C = cauchy_matrix(c)
    f = np.random.default_rng(0).standard_normal(2 * c.N)
    z = ComplexBoundaryFunction.from_real(c, f)
    ref = ComplexBoundaryFunction(c, (C @ z.conj().values).conj()).to_real()
    assert np.abs(conj_cauchy_real(c, C) @ f - ref).max() < 1e-13


def test_odd_node_count_rejected():
    with pytest.raises(ValueError):
        cauchy_matrix(make_curve("circle", N=15))
    with pytest.raises(ValueError):
        involution_residual(make_curve("circle", N=16), "bogus")


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 2**31 - 1), st.sampled_from(CURVES))
def test_decompose2d_sums_and_is_orthogonal(seed, curve):
    c = make_curve(*curve, N=96).scaled(1 / 16)
    rng = np.random.default_rng(seed)
    modes = np.arange(-8, 9)
    coef = rng.standard_normal((2, modes.size)) + 1j * rng.standard_normal((2, modes.size))
    f = np.real(np.exp(1j * np.outer(c.t, modes)) @ coef.T).reshape(-1)
    d = decompose2d(c, f)
    assert np.abs(d["f_minus"] + d["f_plus"] - f).max() < 1e-12
    star = StarInner(assemble_single_layer(c, derive_constants(1.0, 1.0, 2)))
    cross = star.inner(d["f_minus"], d["f_plus"])
    assert abs(cross) <= 1e-8 * star.norm(f) ** 2


def test_decompose2d_constant_is_interior():
    c = make_curve("ellipse", (2.0, 1.0), N=128)
    d = decompose2d(c, np.tile([1.0, 2.0], c.N))
    assert np.abs(d["f_plus"]).max() < 1e-10


def test_dilation_positivity_kite(p2):
    c = make_curve("kite", N=128)
    rows = [dilation_positivity(c, r, p2) for r in (1, 4, 16, 64)]
    assert [r["spd"] for r in rows] == [False, True, True, True]
    mm = [r["mean_mode_min_eig"] for r in rows[1:]]
    assert mm[0] < mm[1] < mm[2]
    with pytest.raises(ValueError):
        dilation_positivity(c, 0.0, p2)


def test_dilation_laplace_circle_is_borderline(p2):
    # unit circle: the log single layer kills constants exactly
    r = dilation_positivity(make_curve("circle", N=64), 1.0, p2, operator="laplace")
    assert abs(r["min_eig"]) < 1e-10


def test_ellipse_outliers_do_not_grow(p2):
    counts = []
    for N in (128, 256):
        s = enp_spectrum(make_curve("ellipse", (2.0, 1.0), N=N), p2)
        counts.append(cluster_eigenvalues(s.eigenvalues, {"-k0": -p2.k0, "+k0": p2.k0},
                                          0.05).counts["outlier"])
    assert counts[1] <= counts[0]
