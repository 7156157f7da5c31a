import numpy as np
import pytest

from conftest import field
from elasticnp.geometry import make_curve
from elasticnp.operators import NonSPDError
from elasticnp.potentials_bvp import (FieldEvaluator, boundary_energies, eigenfunction_asymptotics,
                                      generator_family, jump_check, kdiv_eigen_residual,
                                      laplace_extension, membership, richardson_zero, sample_cloud,
                                      solve_lame_dirichlet, volume_energy)
from elasticnp.sphere_analytic import Polynomial, solid_harmonic_basis

ROT = lambda P: np.c_[-P[:, 1], P[:, 0], 0 * P[:, 0]]
GRAD_XY = lambda P: np.c_[P[:, 1], P[:, 0], 0 * P[:, 0]]
X, Y, Z = (Polynomial.coordinate(i) for i in range(3))


@pytest.fixture(scope="module")
def rot_solution(sphere16, p3):
    return solve_lame_dirichlet(sphere16, p3, field(sphere16, ROT))


def test_rotation_extension(rot_solution):
    # interior: the rigid rotation itself; exterior: x cross e3 / |x|^3
    u = rot_solution.evaluate([[0.5, 0, 0], [2.0, 0, 0]])
    assert np.allclose(u, [[0, 0.5, 0], [0, 0.25, 0]], atol=1e-8)
    _, div, rot = rot_solution.evaluate([[0.3, 0.2, 0.1]], derivatives=True)
    assert abs(div[0]) < 1e-8 and np.allclose(rot[0], [0, 0, 2], atol=1e-8)


def test_rotation_energies(sphere16, p3, rot_solution):
    e = boundary_energies(sphere16, p3, field(sphere16, ROT))
    assert e["E_int"] == pytest.approx(16 * np.pi / 3, rel=1e-8)
    assert e["E_ext"] == pytest.approx(8 * np.pi / 3, rel=1e-8)
    assert volume_energy(rot_solution) == pytest.approx(16 * np.pi / 3, rel=1e-4)


def test_constant_data_reproduced(sphere16, p3):
    b = np.array([1.0, 2.0, 3.0])
    ev = solve_lame_dirichlet(sphere16, p3, np.tile(b, sphere16.n_nodes))
    assert np.abs(ev.evaluate([[0.1, 0.2, 0.3]]) - b).max() < 1e-8


def test_interior_gradient_field(sphere16, p3):
    f = field(sphere16, GRAD_XY)
    assert abs(boundary_energies(sphere16, p3, f)["E_int"]) < 1e-10
    m = membership(sphere16, f)
    assert m["interior"]["div"] < 1e-8 and m["interior"]["rot"] < 1e-8
    assert kdiv_eigen_residual(sphere16, p3, f, 0.5) < 1e-10


def test_laplace_single_of_one(sphere16):
    ev = FieldEvaluator(sphere16, np.ones(sphere16.n_nodes), "single_layer_laplace")
    assert ev.evaluate([[0.0, 0.0, 0.0]])[0] == pytest.approx(-1.0, abs=1e-10)


def test_planar_laplace_extension_harmonic():
    c = make_curve("kite", N=256)
    x, y = c.nodes.T
    f = np.c_[x**2 - y**2, 2 * x * y + 1]
    ev = laplace_extension(c, f.reshape(-1), "interior")
    p = np.array([[0.1, 0.2], [-0.3, 0.1]])
    ref = np.c_[p[:, 0]**2 - p[:, 1]**2, 2 * p[:, 0] * p[:, 1] + 1]
    assert np.abs(ev.evaluate(p) - ref).max() < 1e-8
    with pytest.raises(ValueError):
        laplace_extension(c, f.reshape(-1), "sideways")


def test_jump_planar():
    c = make_curve("ellipse", (2.0, 1.0), N=512)
    t = c.t
    f = np.c_[np.cos(t) + 0.3 * np.sin(3 * t), np.sin(2 * t) - 0.2 * np.cos(5 * t)]
    j = jump_check(c, f.reshape(-1))
    assert j["jump_residual"] <= 1e-3
    assert j["inner_residual"] <= 1e-3 and j["outer_residual"] <= 1e-3


def test_jump_sphere(sphere16):
    j = jump_check(sphere16, field(sphere16, GRAD_XY))
    assert j["jump_residual"] <= 5e-3
    assert np.abs(j["outer_trace"]).max() <= 5e-3


def test_richardson_exact_for_polynomials():
    eps = [0.3, 0.2, 0.1]
    vals = [2 - e + 4 * e**2 for e in eps]
    assert richardson_zero(eps, vals) == pytest.approx(2.0, abs=1e-13)
    with pytest.raises(ValueError):
        jump_check(make_curve("circle", N=32), np.ones(64), epsilons=[0.1])


def test_evaluator_validation(sphere8, p3):
    g = sphere8
    with pytest.raises(ValueError):
        FieldEvaluator(g, np.ones(3 * g.n_nodes), "bogus")
    with pytest.raises(ValueError):
        FieldEvaluator(g, np.ones(3 * g.n_nodes), "single_layer_lame")
    with pytest.raises(ValueError):
        FieldEvaluator(g, np.ones(7), "single_layer_lame", p3)
    ev = FieldEvaluator(g, np.ones(3 * g.n_nodes), "double_layer_divfree")
    with pytest.raises(ValueError):
        ev.evaluate(g.nodes[:1])
    with pytest.raises(NotImplementedError):
        ev.evaluate([[0.1, 0, 0]], derivatives=True)


def test_nonspd_curve_raises(p2):
    c = make_curve("kite", N=64)
    with pytest.raises(NonSPDError, match="dilate"):
        solve_lame_dirichlet(c, p2, np.ones(2 * c.N))


def test_sample_cloud_defaults(sphere8):
    assert sample_cloud(sphere8, "interior").shape == (2 * sphere8.n_nodes, 3)
    r = np.linalg.norm(sample_cloud(sphere8, "exterior"), axis=1)
    assert set(np.round(r, 12)) == {1.25, 2.0}


def test_generator_families_spheroid(spheroid13, p3):
    for q in (X * Y, X * X - Z * Z, X * Y * Z):
        assert kdiv_eigen_residual(spheroid13, p3, generator_family(spheroid13, q, "gradient"),
                                   0.5) <= 1e-8
        assert kdiv_eigen_residual(spheroid13, p3,
                                   generator_family(spheroid13, q, "kelvin_gradient"), -0.5) <= 1e-3
    with pytest.raises(ValueError):
        generator_family(spheroid13, X, "bogus")


def test_tangential_family_is_middle(spheroid13, spheroid_spectra):
    from elasticnp.spectra import decompose_field
    kd = spheroid_spectra[1]
    for q in (Z, X * Y, solid_harmonic_basis(3)[2]):
        n = decompose_field(generator_family(spheroid13, q, "tangential"), kd)["norms"]
        assert n["minus"] <= 1e-5 * n["total"] and n["plus"] <= 1e-5 * n["total"]


def test_eigenfunction_energy_split(sphere_enp, p3):
    a = eigenfunction_asymptotics(sphere_enp)
    assert np.allclose(a["sum"], 1.0, atol=1e-10)
    assert np.all(a["E_int"] > -1e-10) and np.all(a["E_ext"] > -1e-10)
