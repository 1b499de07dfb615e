"""Shared fixtures: bundled nets, quadrature rules, and invariant helpers."""

import pathlib

import numpy as np
import pytest

from gtplateau.io import load_net
from gtplateau.numerics import RngStream, gauss_legendre_rule
from gtplateau.patch import ControlNet, area, boundary_mask, dirichlet_energy

FIXTURES = pathlib.Path(__file__).resolve().parent.parent / "fixtures"


@pytest.fixture(scope="session")
def rule32():
    return gauss_legendre_rule(32)


@pytest.fixture(scope="session")
def rule16():
    return gauss_legendre_rule(16)


@pytest.fixture
def wave_net():
    """Bicubic boundary net with alternating-sign z data; interior unknown."""
    return load_net(FIXTURES / "wave_boundary.json")


@pytest.fixture
def dome_net():
    """Bicubic boundary net with all-positive z data; interior unknown."""
    return load_net(FIXTURES / "dome_boundary.json")


@pytest.fixture
def columns_net():
    """4x4 net with only the first and last columns known (8 unknowns)."""
    return load_net(FIXTURES / "columns_known.json")


@pytest.fixture
def rows_net():
    """4x4 net with only the first and last rows known (8 unknowns)."""
    return load_net(FIXTURES / "rows_known.json")


@pytest.fixture(scope="session")
def check_am_gm(rule32):
    """Assert area <= Dirichlet energy on a patch; returns (area, energy)."""

    def check(patch):
        a = area(patch, rule32)
        e = dirichlet_energy(patch, rule32)
        assert a <= e + 1e-9, f"area {a!r} exceeds Dirichlet energy {e!r}"
        return a, e

    return check


@pytest.fixture(scope="session")
def boundary_net_factory():
    """Seeded random boundary-only nets (interior unknown, boundary fixed)."""

    def make(seed, shape=(4, 4), low=-3.0, high=5.0):
        rng = RngStream(seed, 0)
        points = np.full(shape + (3,), np.nan)
        mask = boundary_mask(*shape)
        points[mask] = rng.uniform(low, high, size=(int(mask.sum()), 3))
        return ControlNet(points=points, fixed=mask)

    return make


@pytest.fixture(scope="session")
def quadratic_minimizer():
    """Direct minimizer of a quadratic functional.

    For quadratic E the unit-step differences are exact: H[q,r] =
    E(e_q + e_r) - E(e_q) - E(e_r) + E(0) and 2 g[q] = E(e_q) - E(-e_q),
    so solving H p = -g recovers the minimizer without touching the
    production assembly code.
    """

    def minimize(energy_of, dims: int):
        basis = np.eye(dims)
        base = energy_of(np.zeros(dims))
        single = np.array([energy_of(basis[q]) for q in range(dims)])
        gradient = np.array(
            [(single[q] - energy_of(-basis[q])) / 2.0 for q in range(dims)]
        )
        hessian = np.empty((dims, dims))
        for q in range(dims):
            for r in range(q, dims):
                value = energy_of(basis[q] + basis[r]) - single[q] - single[r] + base
                hessian[q, r] = hessian[r, q] = value
        return np.linalg.solve(hessian, -gradient)

    return minimize
