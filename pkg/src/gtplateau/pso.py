"""Global-best particle swarm optimization on a box.

The velocity update pairs the first acceleration with the global best and the
second with the particle's personal best:

    v <- w v + c1 r1 (g - x) + c2 r2 (p - x)

with componentwise draws r1, r2. Updates are synchronous: every particle in
iteration t sees the global best settled at the end of iteration t - 1.

Determinism is a hard contract. Each particle owns an independent RngStream
keyed by (seed, particle index); initialization draws its position then its
velocity, and every iteration draws r1 then r2, always in particle order on
the driver thread. Fitness evaluation may fan out to a thread pool, but results
are reduced in particle order, so parallel runs replay sequential ones.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, SolverError
from .numerics import RngStream

THREADS_ENV_VAR = "GT_PLATEAU_THREADS"

_DEFAULT_BOUNDS = ((0.5, 3.5), (0.5, 3.5), (0.5, 3.5), (0.5, 3.5))


@dataclass
class PsoConfig:
    swarm_size: int = 50
    inertia: float = 0.7
    c1: float = 1.5
    c2: float = 1.5
    max_iters: int = 200
    bounds: np.ndarray = field(default_factory=lambda: np.array(_DEFAULT_BOUNDS))
    seed: int = 0
    velocity_init_fraction: float = 0.25
    threads: int | None = None

    def __post_init__(self):
        self.bounds = np.asarray(self.bounds, dtype=float)
        if self.bounds.ndim != 2 or self.bounds.shape[1] != 2 or self.bounds.shape[0] < 1:
            raise ConfigurationError("bounds must be a (dims, 2) array")
        if not np.all(np.isfinite(self.bounds)) or np.any(
            self.bounds[:, 0] >= self.bounds[:, 1]
        ):
            raise ConfigurationError("each bound must satisfy lower < upper")
        if self.swarm_size < 1:
            raise ConfigurationError("swarm size must be >= 1")
        if not 0.0 <= self.inertia <= 1.0:
            raise ConfigurationError("inertia must lie in [0, 1]")
        if self.c1 <= 0.0 or self.c2 <= 0.0:
            raise ConfigurationError("accelerations must be positive")
        if self.max_iters < 0:
            raise ConfigurationError("max_iters must be >= 0")
        if not self.velocity_init_fraction > 0.0:
            raise ConfigurationError("velocity_init_fraction must be positive")
        if self.seed < 0:
            raise ConfigurationError("seed must be a nonnegative integer")
        if self.threads is not None and self.threads < 1:
            raise ConfigurationError("threads must be >= 1 when given")

    @property
    def dims(self) -> int:
        return self.bounds.shape[0]


@dataclass
class SwarmState:
    positions: np.ndarray
    velocities: np.ndarray
    personal_best: np.ndarray
    personal_best_values: np.ndarray
    global_best: np.ndarray
    global_best_value: float
    iteration: int
    history: list


@dataclass
class PsoResult:
    position: np.ndarray
    value: float
    history: np.ndarray
    evaluations: int
    state: SwarmState


def project_to_bounds(x, bounds) -> np.ndarray:
    """Componentwise clamp onto the box; idempotent."""
    bounds = np.asarray(bounds, dtype=float)
    return np.clip(np.asarray(x, dtype=float), bounds[:, 0], bounds[:, 1])


def resolve_threads(threads: int | None) -> int:
    """Explicit setting wins; else the environment cap; else sequential."""
    if threads is not None:
        return int(threads)
    raw = os.environ.get(THREADS_ENV_VAR, "").strip()
    if not raw:
        return 1
    try:
        value = int(raw)
    except ValueError as exc:
        raise ConfigurationError(f"{THREADS_ENV_VAR} must be an integer, got {raw!r}") from exc
    if value < 1:
        raise ConfigurationError(f"{THREADS_ENV_VAR} must be >= 1, got {value}")
    return value


def _guard(objective):
    def call(x):
        try:
            value = float(objective(x))
        except (SolverError, FloatingPointError, np.linalg.LinAlgError):
            return math.inf
        return math.inf if math.isnan(value) else value

    return call


def optimize(objective, config: PsoConfig) -> PsoResult:
    """Minimize ``objective`` over the configured box.

    Inner-solver failures count as +inf fitness rather than aborting the
    swarm. The returned history holds the global best value per iteration,
    including the initial swarm (index 0), and is non-increasing.
    """
    lo = config.bounds[:, 0]
    width = config.bounds[:, 1] - lo
    n = config.swarm_size
    dims = config.dims
    guarded = _guard(objective)

    streams = [RngStream(config.seed, i) for i in range(n)]
    positions = np.empty((n, dims))
    velocities = np.empty((n, dims))
    for i, stream in enumerate(streams):
        positions[i] = lo + width * stream.uniform(size=dims)
        velocities[i] = (
            config.velocity_init_fraction * width * (2.0 * stream.uniform(size=dims) - 1.0)
        )

    threads = resolve_threads(config.threads)
    pool = ThreadPoolExecutor(max_workers=threads) if threads > 1 else None
    try:
        def evaluate_all(points):
            if pool is None:
                return np.array([guarded(p) for p in points])
            return np.array(list(pool.map(guarded, points)))  # map preserves order

        values = evaluate_all(positions)
        evaluations = n
        personal_best = positions.copy()
        personal_values = values.copy()
        best_index = int(np.argmin(personal_values))
        global_best = personal_best[best_index].copy()
        global_value = float(personal_values[best_index])
        history = [global_value]

        for iteration in range(1, config.max_iters + 1):
            for i, stream in enumerate(streams):
                r1 = stream.uniform(size=dims)
                r2 = stream.uniform(size=dims)
                velocities[i] = (
                    config.inertia * velocities[i]
                    + config.c1 * r1 * (global_best - positions[i])
                    + config.c2 * r2 * (personal_best[i] - positions[i])
                )
                positions[i] = project_to_bounds(positions[i] + velocities[i], config.bounds)

            values = evaluate_all(positions)
            evaluations += n
            improved = values < personal_values
            personal_best[improved] = positions[improved]
            personal_values[improved] = values[improved]
            best_index = int(np.argmin(personal_values))
            if personal_values[best_index] < global_value:
                global_value = float(personal_values[best_index])
                global_best = personal_best[best_index].copy()
            history.append(global_value)
    finally:
        if pool is not None:
            pool.shutdown(wait=True)

    state = SwarmState(
        positions=positions,
        velocities=velocities,
        personal_best=personal_best,
        personal_best_values=personal_values,
        global_best=global_best,
        global_best_value=global_value,
        iteration=config.max_iters,
        history=history,
    )
    return PsoResult(
        position=global_best.copy(),
        value=global_value,
        history=np.array(history),
        evaluations=evaluations,
        state=state,
    )
