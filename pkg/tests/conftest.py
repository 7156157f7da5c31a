"""Shared, session-scoped geometries and spectra (the dense solves are the slow part)."""
import numpy as np
import pytest

from elasticnp.geometry import make_curve, make_parametric_surface, make_sphere_grid
from elasticnp.params_kernels import derive_constants


@pytest.fixture(scope="session")
def p3():
    return derive_constants(1.0, 1.0, 3)


@pytest.fixture(scope="session")
def p2():
    return derive_constants(1.0, 1.0, 2)


@pytest.fixture(scope="session")
def sphere16():
    return make_sphere_grid(16)


@pytest.fixture(scope="session")
def sphere8():
    return make_sphere_grid(8)


@pytest.fixture(scope="session")
def spheroid13():
    return make_parametric_surface("spheroid", (1.0, 1.3), 16)


@pytest.fixture(scope="session")
def ellipse256():
    return make_curve("ellipse", (2.0, 1.0), N=256)


@pytest.fixture(scope="session")
def sphere_enp(sphere16, p3):
    from elasticnp.spectra import enp_spectrum
    return enp_spectrum(sphere16, p3)


@pytest.fixture(scope="session")
def sphere_kdiv(sphere16, p3):
    from elasticnp.spectra import kdiv_spectrum
    return kdiv_spectrum(sphere16, p3)


@pytest.fixture(scope="session")
def spheroid_spectra(spheroid13, p3):
    from elasticnp.spectra import enp_spectrum, kdiv_spectrum
    return enp_spectrum(spheroid13, p3), kdiv_spectrum(spheroid13, p3)


def field(geom, fn):
    """Node-major samples of a vector function of the node coordinates."""
    return np.asarray(fn(geom.nodes), float).reshape(-1)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
