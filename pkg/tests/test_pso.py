"""Particle swarm: determinism, update-rule semantics, guards, threading."""

import math

import numpy as np
import pytest

from gtplateau.dirichlet import reduced_functional, solve_interior
from gtplateau.errors import ConfigurationError, SolverError
from gtplateau.numerics import RngStream
from gtplateau.patch import Patch, SurfaceShape, area
from gtplateau.pso import (
    THREADS_ENV_VAR,
    PsoConfig,
    PsoResult,
    SwarmState,
    optimize,
    project_to_bounds,
    resolve_threads,
)

UNIT_BOX = np.array([[0.0, 1.0], [0.0, 1.0]])


def sphere(x: np.ndarray) -> float:
    return float(((x - 2.0) ** 2).sum())


class TestProjectToBounds:
    def test_inside_unchanged(self):
        np.testing.assert_array_equal(
            project_to_bounds([0.25, 0.75], UNIT_BOX), [0.25, 0.75]
        )

    def test_clamps_componentwise(self):
        np.testing.assert_array_equal(
            project_to_bounds([-3.0, 4.0], UNIT_BOX), [0.0, 1.0]
        )

    def test_idempotent(self):
        once = project_to_bounds([2.0, -1.0], UNIT_BOX)
        np.testing.assert_array_equal(project_to_bounds(once, UNIT_BOX), once)


class TestConfigValidation:
    @pytest.mark.parametrize(
        "kwargs",
        [
            {"bounds": [0.0, 1.0]},
            {"bounds": np.empty((0, 2))},
            {"bounds": [[1.0, 1.0]]},
            {"bounds": [[0.0, np.inf]]},
            {"swarm_size": 0},
            {"inertia": -0.1},
            {"inertia": 1.5},
            {"c1": 0.0},
            {"c2": -1.0},
            {"max_iters": -1},
            {"velocity_init_fraction": 0.0},
            {"seed": -1},
            {"threads": 0},
        ],
    )
    def test_rejects(self, kwargs):
        with pytest.raises(ConfigurationError):
            PsoConfig(**kwargs)

    def test_default_box_is_shape_domain(self):
        config = PsoConfig()
        assert config.dims == 4
        np.testing.assert_array_equal(config.bounds[:, 0], 0.5)
        np.testing.assert_array_equal(config.bounds[:, 1], 3.5)


class TestOptimize:
    def test_sphere_converges(self):
        result = optimize(sphere, PsoConfig(seed=42))
        assert np.abs(result.position - 2.0).max() < 1e-3
        assert result.value < 1e-6

    def test_history_contract(self):
        config = PsoConfig(swarm_size=12, max_iters=30, seed=5, bounds=UNIT_BOX)
        result = optimize(lambda x: float(np.cos(9.0 * x).sum()), config)
        assert result.history.shape == (31,)
        assert np.all(np.diff(result.history) <= 0.0)
        assert result.evaluations == 12 * 31
        assert result.history[-1] == result.value
        assert result.state.iteration == 30

    def test_constant_objective(self):
        config = PsoConfig(swarm_size=4, max_iters=7, seed=1, bounds=UNIT_BOX)
        result = optimize(lambda x: 5.0, config)
        assert np.all(result.history == 5.0)
        assert result.history.shape == (8,)

    def test_zero_iterations_reports_initial_swarm(self):
        config = PsoConfig(swarm_size=3, max_iters=0, seed=9, bounds=UNIT_BOX)
        result = optimize(sphere, config)
        assert result.history.shape == (1,) and result.evaluations == 3

        # replay the initialization draws: position first, then velocity
        lo, width = UNIT_BOX[:, 0], UNIT_BOX[:, 1] - UNIT_BOX[:, 0]
        best = math.inf
        for i in range(3):
            stream = RngStream(9, i)
            position = lo + width * stream.uniform(size=2)
            stream.uniform(size=2)
            best = min(best, sphere(position))
        assert result.history[0] == best

    def test_runs_replay_exactly(self):
        config = PsoConfig(swarm_size=8, max_iters=12, seed=13, bounds=UNIT_BOX)
        first = optimize(sphere, config)
        second = optimize(sphere, PsoConfig(swarm_size=8, max_iters=12, seed=13, bounds=UNIT_BOX))
        np.testing.assert_array_equal(first.history, second.history)
        np.testing.assert_array_equal(first.position, second.position)
        np.testing.assert_array_equal(first.state.positions, second.state.positions)

    def test_seed_changes_trajectory(self):
        result_a = optimize(sphere, PsoConfig(swarm_size=8, max_iters=5, seed=0, bounds=UNIT_BOX))
        result_b = optimize(sphere, PsoConfig(swarm_size=8, max_iters=5, seed=1, bounds=UNIT_BOX))
        assert not np.array_equal(result_a.history, result_b.history)

    def test_parallel_replays_sequential(self):
        kwargs = dict(swarm_size=10, max_iters=15, seed=21, bounds=UNIT_BOX)
        sequential = optimize(sphere, PsoConfig(threads=1, **kwargs))
        parallel = optimize(sphere, PsoConfig(threads=2, **kwargs))
        np.testing.assert_array_equal(parallel.history, sequential.history)
        np.testing.assert_array_equal(parallel.position, sequential.position)
        np.testing.assert_array_equal(parallel.state.velocities, sequential.state.velocities)

    def test_evaluated_positions_stay_feasible(self):
        seen = []

        def recording(x):
            seen.append(x.copy())
            return sphere(x)

        config = PsoConfig(swarm_size=6, max_iters=10, seed=3, threads=1, bounds=UNIT_BOX)
        optimize(recording, config)
        stacked = np.array(seen)
        assert stacked.shape == (6 * 11, 2)
        assert stacked.min() >= 0.0 and stacked.max() <= 1.0

    def test_personal_best_dominates_particle_trajectory(self):
        seen = []

        def recording(x):
            seen.append(float(np.cos(7.0 * x).sum() + (x * x).sum()))
            return seen[-1]

        n = 5
        config = PsoConfig(swarm_size=n, max_iters=9, seed=11, threads=1, bounds=UNIT_BOX)
        result = optimize(recording, config)
        values = np.array(seen).reshape(-1, n)  # sequential: call k is particle k % n
        per_particle_min = values.min(axis=0)
        np.testing.assert_array_equal(result.state.personal_best_values, per_particle_min)
        assert result.value == per_particle_min.min()

    def test_exact_replay_of_update_rule(self):
        # asymmetric accelerations: a swapped-coefficient update cannot replay this
        bounds = np.array([[0.0, 1.0], [0.0, 2.0]])
        config = PsoConfig(
            swarm_size=2, inertia=0.5, c1=1.5, c2=0.5, max_iters=2,
            bounds=bounds, seed=7, threads=1,
        )

        def objective(x):
            return float((x * x).sum())

        result = optimize(objective, config)

        lo, width = bounds[:, 0], bounds[:, 1] - bounds[:, 0]
        streams = [RngStream(7, i) for i in range(2)]
        positions = np.empty((2, 2))
        velocities = np.empty((2, 2))
        for i, stream in enumerate(streams):
            positions[i] = lo + width * stream.uniform(size=2)
            velocities[i] = (
                config.velocity_init_fraction * width * (2.0 * stream.uniform(size=2) - 1.0)
            )
        personal_best = positions.copy()
        personal_values = np.array([objective(p) for p in positions])
        best = int(np.argmin(personal_values))
        global_best = personal_best[best].copy()
        global_value = float(personal_values[best])
        history = [global_value]

        for _ in range(config.max_iters):
            for i, stream in enumerate(streams):
                r1 = stream.uniform(size=2)
                r2 = stream.uniform(size=2)
                velocities[i] = (
                    config.inertia * velocities[i]
                    + config.c1 * r1 * (global_best - positions[i])
                    + config.c2 * r2 * (personal_best[i] - positions[i])
                )
                positions[i] = project_to_bounds(positions[i] + velocities[i], bounds)
            values = np.array([objective(p) for p in positions])
            improved = values < personal_values
            personal_best[improved] = positions[improved]
            personal_values[improved] = values[improved]
            best = int(np.argmin(personal_values))
            if personal_values[best] < global_value:
                global_value = float(personal_values[best])
                global_best = personal_best[best].copy()
            history.append(global_value)

        np.testing.assert_array_equal(result.history, np.array(history))
        np.testing.assert_array_equal(result.state.positions, positions)
        np.testing.assert_array_equal(result.state.velocities, velocities)
        np.testing.assert_array_equal(result.state.personal_best, personal_best)
        np.testing.assert_array_equal(result.position, global_best)
        assert result.value == global_value
        assert result.evaluations == 6


class TestGuards:
    def test_solver_failures_count_as_inf(self):
        def fragile(x):
            if x[0] < 0.5:
                raise SolverError("inner solve failed")
            return float(x.sum())

        config = PsoConfig(swarm_size=12, max_iters=8, seed=2, bounds=UNIT_BOX)
        result = optimize(fragile, config)
        assert math.isfinite(result.value)
        assert result.position[0] >= 0.5

    def test_nan_never_becomes_best(self):
        def patchy(x):
            return float("nan") if x[0] > 0.3 else float(x[1])

        config = PsoConfig(swarm_size=12, max_iters=8, seed=4, bounds=UNIT_BOX)
        result = optimize(patchy, config)
        assert math.isfinite(result.value)
        assert result.position[0] <= 0.3

    def test_all_failures_yield_inf_result(self):
        def hopeless(x):
            raise np.linalg.LinAlgError("always singular")

        config = PsoConfig(swarm_size=3, max_iters=2, seed=6, bounds=UNIT_BOX)
        result = optimize(hopeless, config)
        assert math.isinf(result.value)
        assert np.all(np.isinf(result.history))

    def test_unguarded_errors_propagate(self):
        def broken(x):
            raise ValueError("not a solver failure")

        with pytest.raises(ValueError):
            optimize(broken, PsoConfig(swarm_size=2, max_iters=1, seed=0, bounds=UNIT_BOX))


class TestResolveThreads:
    def test_explicit_wins_over_env(self, monkeypatch):
        monkeypatch.setenv(THREADS_ENV_VAR, "7")
        assert resolve_threads(3) == 3

    def test_env_used_when_unset(self, monkeypatch):
        monkeypatch.setenv(THREADS_ENV_VAR, "4")
        assert resolve_threads(None) == 4

    def test_defaults_to_sequential(self, monkeypatch):
        monkeypatch.delenv(THREADS_ENV_VAR, raising=False)
        assert resolve_threads(None) == 1
        monkeypatch.setenv(THREADS_ENV_VAR, "  ")
        assert resolve_threads(None) == 1

    @pytest.mark.parametrize("raw", ["abc", "1.5", "0", "-2"])
    def test_invalid_env_rejected(self, monkeypatch, raw):
        monkeypatch.setenv(THREADS_ENV_VAR, raw)
        with pytest.raises(ConfigurationError):
            resolve_threads(None)


class TestShapeOptimization:
    def test_small_swarm_improves_wave_energy(self, wave_net, rule16):
        def objective(x):
            return reduced_functional(wave_net, SurfaceShape.from_iterable(x), rule16)

        config = PsoConfig(swarm_size=8, max_iters=5, seed=0, threads=1)
        result = optimize(objective, config)
        assert np.all(np.diff(result.history) <= 0.0)
        assert result.value <= result.history[0]

        shape = SurfaceShape.from_iterable(result.position)
        solved = solve_interior(wave_net, *shape.basis_specs(3, 3), rule16)
        patch = Patch.gt(solved.net, shape)
        assert area(patch, rule16) <= 38.0
