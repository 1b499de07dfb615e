"""Coons interpolation and the hybrid blended patch."""

import numpy as np
import pytest

from gtplateau.basis import BasisSpec
from gtplateau.coons import (
    BoundaryCurves,
    CurveSpec,
    coons_classical,
    coons_classical_matrix,
    optimize_tb,
    require_blend_net,
    solve_tb_interior,
    tb_components,
    tb_coons,
    tb_dirichlet_energy,
    tb_surface_jet,
)
from gtplateau.errors import ConfigurationError
from gtplateau.numerics import RngStream, finite_diff_gradient
from gtplateau.patch import ControlNet, SurfaceShape
from gtplateau.pso import PsoConfig

CUBIC = BasisSpec.bernstein(3)
TS = np.linspace(0.0, 1.0, 21)


def border_curves(points: np.ndarray, u0_basis: BasisSpec = CUBIC) -> BoundaryCurves:
    """The four border curves of a complete 4x4 net."""
    return BoundaryCurves(
        side_v0=CurveSpec(basis=CUBIC, controls=points[:, 0]),
        side_v1=CurveSpec(basis=CUBIC, controls=points[:, 3]),
        side_u0=CurveSpec(basis=u0_basis, controls=points[0, :]),
        side_u1=CurveSpec(basis=CUBIC, controls=points[3, :]),
    )


def random_points(seed: int) -> np.ndarray:
    return RngStream(seed, 0).uniform(-2.0, 4.0, (4, 4, 3))


def random_shape(seed: int) -> SurfaceShape:
    return SurfaceShape.from_iterable(RngStream(seed, 1).uniform(0.5, 3.5, 4))


class TestCurveSpec:
    def test_rejects_wrong_control_count(self):
        with pytest.raises(ConfigurationError, match=r"\(4, 3\)"):
            CurveSpec(basis=CUBIC, controls=np.zeros((3, 3)))

    def test_rejects_nonfinite(self):
        controls = np.zeros((4, 3))
        controls[2, 1] = np.inf
        with pytest.raises(ConfigurationError, match="finite"):
            CurveSpec(basis=CUBIC, controls=controls)

    def test_evaluation_shape_and_endpoints(self):
        controls = random_points(1)[:, 0]
        spec = CurveSpec(basis=CUBIC, controls=controls)
        values = spec.at(TS)
        assert values.shape == (21, 3)
        np.testing.assert_array_equal(values[0], controls[0])
        np.testing.assert_array_equal(values[-1], controls[-1])


class TestBoundaryCurves:
    def test_compatible_net_border(self):
        curves = border_curves(random_points(2))
        corners = curves.corners()
        points = random_points(2)
        np.testing.assert_allclose(corners[0, 0], points[0, 0], atol=1e-15)
        np.testing.assert_allclose(corners[1, 0], points[3, 0], atol=1e-15)
        np.testing.assert_allclose(corners[0, 1], points[0, 3], atol=1e-15)
        np.testing.assert_allclose(corners[1, 1], points[3, 3], atol=1e-15)

    def test_gt_side_is_still_compatible(self):
        border_curves(random_points(3), u0_basis=BasisSpec.gt(3, 1.2, 2.8))

    def test_corner_mismatch_rejected(self):
        points = random_points(4)
        broken = points[:, 0].copy()
        broken[0] += 0.5
        with pytest.raises(ConfigurationError, match="incompatible boundary corners"):
            BoundaryCurves(
                side_v0=CurveSpec(basis=CUBIC, controls=broken),
                side_v1=CurveSpec(basis=CUBIC, controls=points[:, 3]),
                side_u0=CurveSpec(basis=CUBIC, controls=points[0, :]),
                side_u1=CurveSpec(basis=CUBIC, controls=points[3, :]),
            )


class TestClassicalCoons:
    def test_straight_sides_give_bilinear(self):
        corners = np.array(
            [[[0.0, 0.0, 0.0], [0.0, 3.0, 1.0]], [[2.0, 0.0, -1.0], [2.0, 3.0, 2.0]]]
        )
        t = np.arange(4.0)[:, None] / 3.0
        points = np.empty((4, 4, 3))
        side = lambda p, q: p + t * (q - p)
        points[:, 0] = side(corners[0, 0], corners[1, 0])
        points[:, 3] = side(corners[0, 1], corners[1, 1])
        points[0, :] = side(corners[0, 0], corners[0, 1])
        points[3, :] = side(corners[1, 0], corners[1, 1])
        curves = border_curves(points)
        for u in TS[::4]:
            for v in TS[::4]:
                bilinear = (
                    (1 - u) * (1 - v) * corners[0, 0]
                    + (1 - u) * v * corners[0, 1]
                    + u * (1 - v) * corners[1, 0]
                    + u * v * corners[1, 1]
                )
                np.testing.assert_allclose(
                    coons_classical(curves, u, v), bilinear, atol=1e-14
                )

    def test_interpolates_all_four_sides(self):
        curves = border_curves(random_points(5), u0_basis=BasisSpec.gt(3, 0.6, 3.1))
        for t in TS:
            np.testing.assert_allclose(
                coons_classical(curves, t, 0.0), curves.side_v0.at([t])[0], atol=1e-12
            )
            np.testing.assert_allclose(
                coons_classical(curves, t, 1.0), curves.side_v1.at([t])[0], atol=1e-12
            )
            np.testing.assert_allclose(
                coons_classical(curves, 0.0, t), curves.side_u0.at([t])[0], atol=1e-12
            )
            np.testing.assert_allclose(
                coons_classical(curves, 1.0, t), curves.side_u1.at([t])[0], atol=1e-12
            )

    def test_matrix_form_agrees(self):
        curves = border_curves(random_points(6))
        for u in TS[::2]:
            for v in TS[::2]:
                np.testing.assert_allclose(
                    coons_classical_matrix(curves, u, v),
                    coons_classical(curves, u, v),
                    atol=1e-13,
                )

    @pytest.mark.parametrize("u,v", [(-0.01, 0.5), (0.5, 1.5)])
    def test_parameter_domain(self, u, v):
        curves = border_curves(random_points(7))
        with pytest.raises(ConfigurationError, match=r"\[0, 1\]"):
            coons_classical(curves, u, v)


class TestBlendNetValidation:
    def test_needs_4x4(self):
        with pytest.raises(ConfigurationError, match="4x4"):
            require_blend_net(ControlNet(points=np.zeros((5, 5, 3))))

    def test_needs_full_boundary(self):
        points = np.zeros((4, 4, 3))
        points[0, 2] = np.nan
        with pytest.raises(ConfigurationError, match="twelve boundary points"):
            require_blend_net(ControlNet(points=points))

    def test_evaluation_needs_complete_interior(self, wave_net):
        with pytest.raises(ConfigurationError, match="must be known"):
            require_blend_net(wave_net, complete=True)

    def test_solve_needs_open_interior(self):
        with pytest.raises(ConfigurationError, match="must be unknown"):
            require_blend_net(ControlNet(points=random_points(8)), complete=False)

    def test_wave_fixture_fits_the_solve(self, wave_net):
        require_blend_net(wave_net, complete=False)


class TestHybridSurface:
    def test_corner_value(self):
        points = random_points(9)
        net = ControlNet(points=points)
        value = tb_coons(net, random_shape(9), 0.0, 0.0)
        np.testing.assert_allclose(value, points[0, 0], atol=1e-13)

    def test_correction_cancels_r2_on_bottom_edge(self):
        net = ControlNet(points=random_points(10))
        shape = random_shape(10)
        for u in TS[::3]:
            r1, r2, t = tb_components(net, shape, u, 0.0)
            np.testing.assert_allclose(r2, t, atol=1e-12)
            np.testing.assert_allclose(tb_coons(net, shape, u, 0.0), r1, atol=1e-12)

    def test_boundary_is_bernstein_for_every_shape(self):
        points = random_points(11)
        net = ControlNet(points=points)
        grid = np.linspace(0.5, 3.5, 5)
        for a in grid:
            for b in grid:
                shape = SurfaceShape(a, a, b, b)
                jet = tb_surface_jet(net, shape, TS, np.array([0.0, 1.0]))
                np.testing.assert_allclose(
                    jet.S[:, 0], CurveSpec(basis=CUBIC, controls=points[:, 0]).at(TS),
                    atol=1e-12,
                )
                np.testing.assert_allclose(
                    jet.S[:, 1], CurveSpec(basis=CUBIC, controls=points[:, 3]).at(TS),
                    atol=1e-12,
                )
                jet = tb_surface_jet(net, shape, np.array([0.0, 1.0]), TS)
                np.testing.assert_allclose(
                    jet.S[0], CurveSpec(basis=CUBIC, controls=points[0, :]).at(TS),
                    atol=1e-12,
                )
                np.testing.assert_allclose(
                    jet.S[1], CurveSpec(basis=CUBIC, controls=points[3, :]).at(TS),
                    atol=1e-12,
                )

    def test_correction_ignores_interior(self):
        points = random_points(12)
        other = points.copy()
        other[1:3, 1:3] += 5.0
        shape = random_shape(12)
        _, _, t_a = tb_components(ControlNet(points=points), shape, 0.4, 0.7)
        _, _, t_b = tb_components(ControlNet(points=other), shape, 0.4, 0.7)
        np.testing.assert_array_equal(t_a, t_b)

    def test_jet_against_finite_differences(self):
        net = ControlNet(points=random_points(13))
        shape = SurfaceShape(1.3, 0.7, 2.9, 1.1)
        h = 1e-5
        for u, v in [(0.3, 0.4), (0.62, 0.18), (0.5, 0.87)]:
            us = np.array([u - h, u, u + h])
            vs = np.array([v - h, v, v + h])
            jet = tb_surface_jet(net, shape, us, vs)
            s = jet.S
            checks = [
                ((s[2, 1] - s[0, 1]) / (2 * h), jet.Su[1, 1]),
                ((s[1, 2] - s[1, 0]) / (2 * h), jet.Sv[1, 1]),
                ((s[2, 1] - 2 * s[1, 1] + s[0, 1]) / h**2, jet.Suu[1, 1]),
                ((s[1, 2] - 2 * s[1, 1] + s[1, 0]) / h**2, jet.Svv[1, 1]),
                (
                    (s[2, 2] - s[2, 0] - s[0, 2] + s[0, 0]) / (4 * h**2),
                    jet.Suv[1, 1],
                ),
            ]
            for fd, exact in checks:
                assert np.abs(fd - exact).max() / (1 + np.abs(exact).max()) < 1e-5

    @pytest.mark.parametrize("params", [([-0.1], [0.5]), ([0.5], [1.2])])
    def test_jet_parameter_domain(self, params):
        net = ControlNet(points=random_points(14))
        with pytest.raises(ConfigurationError, match=r"\[0, 1\]"):
            tb_surface_jet(net, random_shape(14), *params)


class TestInteriorSolve:
    def test_planar_boundary_stays_planar(self, wave_net, rule32):
        points = wave_net.points.copy()
        points[..., 2] = np.where(np.isnan(points[..., 0]), np.nan, 0.0)
        net = ControlNet(points=points)
        solved = solve_tb_interior(net, SurfaceShape(1.5, 2.5, 0.8, 3.2), rule32)
        assert np.all(solved.points[..., 2] == 0.0)

    def test_boundary_carried_bitwise(self, wave_net, rule32):
        shape = SurfaceShape(2.0, 2.0, 2.0, 2.0)
        solved = solve_tb_interior(wave_net, shape, rule32)
        np.testing.assert_array_equal(
            solved.points[wave_net.fixed], wave_net.points[wave_net.fixed]
        )
        assert solved.is_complete

    def test_matches_direct_minimization(self, wave_net, rule32, quadratic_minimizer):
        shape = SurfaceShape(1.9, 0.8, 3.0, 1.4)

        def energy_of(vec):
            points = wave_net.points.copy()
            points[wave_net.free] = vec.reshape(-1, 3)
            return tb_dirichlet_energy(ControlNet(points=points), shape, rule32)

        oracle = quadratic_minimizer(energy_of, 12)
        solved = solve_tb_interior(wave_net, shape, rule32)
        np.testing.assert_allclose(
            solved.points[wave_net.free].ravel(), oracle, atol=1e-8
        )

    def test_energy_is_exactly_quadratic(self, wave_net, rule32):
        shape = SurfaceShape(2.7, 1.2, 0.6, 3.3)
        dims = 12

        def energy_of(vec):
            points = wave_net.points.copy()
            points[wave_net.free] = vec.reshape(-1, 3)
            return tb_dirichlet_energy(ControlNet(points=points), shape, rule32)

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

        probe = RngStream(15, 0).uniform(-2.0, 2.0, dims)
        model = base + gradient @ probe + 0.5 * probe @ hessian @ probe
        actual = energy_of(probe)
        assert abs(actual - model) < 1e-9 * (1.0 + abs(actual))

    def test_solution_beats_random_perturbations(self, wave_net, rule32):
        shape = SurfaceShape(1.1, 1.1, 1.1, 1.1)
        solved = solve_tb_interior(wave_net, shape, rule32)
        best = tb_dirichlet_energy(solved, shape, rule32)
        rng = RngStream(16, 0)
        for _ in range(100):
            points = solved.points.copy()
            points[1:3, 1:3] += rng.uniform(-0.5, 0.5, (2, 2, 3))
            assert tb_dirichlet_energy(ControlNet(points=points), shape, rule32) >= best

    def test_gradient_certificate(self, wave_net, rule32):
        shape = SurfaceShape(0.9, 2.2, 1.7, 3.1)
        solved = solve_tb_interior(wave_net, shape, rule32)
        energy = tb_dirichlet_energy(solved, shape, rule32)

        def energy_of(vec):
            points = solved.points.copy()
            points[wave_net.free] = vec.reshape(-1, 3)
            return tb_dirichlet_energy(ControlNet(points=points), shape, rule32)

        gradient = finite_diff_gradient(
            energy_of, solved.points[wave_net.free].ravel(), step=1e-6
        )
        assert np.abs(gradient).max() < 1e-5 * (1.0 + energy)

    def test_complete_interior_rejected(self, rule32):
        with pytest.raises(ConfigurationError, match="must be unknown"):
            solve_tb_interior(
                ControlNet(points=random_points(17)), SurfaceShape(2, 2, 2, 2), rule32
            )


class TestShapeOptimization:
    def test_beats_default_shape(self, wave_net, rule32):
        default = SurfaceShape(2.0, 2.0, 2.0, 2.0)
        fixed = tb_dirichlet_energy(
            solve_tb_interior(wave_net, default, rule32), default, rule32
        )
        assert abs(fixed - 39.25238638199208) / 39.25238638199208 < 1e-9

        config = PsoConfig(swarm_size=6, max_iters=4, seed=3, threads=1)
        optimum = optimize_tb(wave_net, config, rule32)
        assert optimum.energy <= fixed
        assert abs(optimum.energy - 39.22525274076327) / 39.22525274076327 < 1e-9
        assert np.all(np.diff(optimum.history) <= 0.0)
        assert optimum.history.shape == (5,)
        assert optimum.net.is_complete
        assert abs(optimum.energy - optimum.pso.value) < 1e-12
        assert optimum.system_condition_hint >= 1.0
        np.testing.assert_array_equal(optimum.shape.as_array(), optimum.pso.position)

    def test_bounds_must_be_four_dimensional(self, wave_net, rule16):
        config = PsoConfig(bounds=np.array([[0.5, 3.5], [0.5, 3.5]]), swarm_size=4)
        with pytest.raises(ConfigurationError, match="4-dimensional"):
            optimize_tb(wave_net, config, rule16)
