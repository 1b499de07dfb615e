"""Shared low-level numerics.

Gauss-Legendre quadrature on [0, 1], dense symmetric/general solves with an
SPD fast path, independent seeded random substreams, and central-difference
utilities used as test oracles throughout the package.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .errors import ConfigurationError, SolverError

MAX_QUADRATURE_ORDER = 256

#: Default central-difference step, balanced for unit-scale double data.
DEFAULT_FD_STEP = 1e-5


@dataclass(frozen=True)
class QuadratureRule:
    """Nodes and weights of a quadrature rule on [0, 1].

    Nodes are strictly increasing inside (0, 1); weights are positive and sum
    to 1 (the interval length).
    """

    nodes: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float)
        weights = np.asarray(self.weights, dtype=float)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "weights", weights)
        if nodes.ndim != 1 or weights.shape != nodes.shape:
            raise ConfigurationError("nodes and weights must be 1-D arrays of equal length")
        if nodes.size == 0:
            raise ConfigurationError("a quadrature rule needs at least one node")
        if np.any(nodes <= 0.0) or np.any(nodes >= 1.0) or np.any(np.diff(nodes) <= 0.0):
            raise ConfigurationError("nodes must be strictly increasing inside (0, 1)")
        if np.any(weights <= 0.0) or abs(weights.sum() - 1.0) > 1e-14:
            raise ConfigurationError("weights must be positive and sum to 1")

    @property
    def order(self) -> int:
        return self.nodes.size


def gauss_legendre_rule(k: int) -> QuadratureRule:
    """Return the k-node Gauss-Legendre rule mapped from [-1, 1] to [0, 1].

    Exact for polynomials of degree <= 2k - 1.
    """
    if not isinstance(k, (int, np.integer)) or isinstance(k, bool):
        raise ConfigurationError("node count must be an integer")
    if not 1 <= k <= MAX_QUADRATURE_ORDER:
        raise ConfigurationError(
            f"node count must lie in [1, {MAX_QUADRATURE_ORDER}], got {k}"
        )
    x, w = np.polynomial.legendre.leggauss(int(k))
    return QuadratureRule(nodes=(x + 1.0) / 2.0, weights=w / 2.0)


def integrate_2d(f, rule: QuadratureRule) -> float:
    """Tensor-product quadrature of a scalar field on the unit square.

    ``f`` is called pointwise on every node pair (u_i, v_j).
    """
    u = rule.nodes
    w = rule.weights
    values = np.array([[float(f(ui, vj)) for vj in u] for ui in u])
    return float(w @ values @ w)


@dataclass
class DenseSystem:
    """A dense linear system ``matrix @ X = rhs`` with K right-hand sides.

    ``symmetric=True`` asserts near-symmetry at construction time; the solver
    uses it to decide whether an SPD fast path is worth attempting.
    """

    matrix: np.ndarray
    rhs: np.ndarray
    symmetric: bool = field(default=False)

    def __post_init__(self):
        self.matrix = np.asarray(self.matrix, dtype=float)
        self.rhs = np.asarray(self.rhs, dtype=float)
        if self.matrix.ndim != 2 or self.matrix.shape[0] != self.matrix.shape[1]:
            raise ConfigurationError("matrix must be square")
        n = self.matrix.shape[0]
        if self.rhs.shape[:1] != (n,) or self.rhs.ndim not in (1, 2):
            raise ConfigurationError("rhs must have one row per matrix row")
        if self.symmetric:
            gap = np.abs(self.matrix - self.matrix.T).max(initial=0.0)
            scale = 1.0 + np.abs(self.matrix).max(initial=0.0)
            if gap >= 1e-10 * scale:
                raise ConfigurationError(
                    f"system flagged symmetric but max asymmetry {gap:.3e} exceeds tolerance"
                )

    @property
    def size(self) -> int:
        return self.matrix.shape[0]


def solve_dense(system: DenseSystem, spd_hint: bool = False) -> np.ndarray:
    """Solve a dense system, preferring Cholesky when the SPD hint holds.

    The hint is verified at runtime: if the Cholesky factorization fails, a
    warning is emitted and the solve falls back to pivoted elimination.
    Singular-to-working-precision matrices raise SolverError naming the
    failing pivot. The returned solution matches the rhs dimensionality.
    """
    rhs = system.rhs
    squeeze = rhs.ndim == 1
    b = rhs[:, None] if squeeze else rhs

    x = None
    if spd_hint:
        try:
            factor = scipy.linalg.cho_factor(system.matrix, check_finite=False)
            x = scipy.linalg.cho_solve(factor, b, check_finite=False)
        except scipy.linalg.LinAlgError:
            warnings.warn(
                "SPD hint failed Cholesky verification; falling back to pivoted elimination",
                RuntimeWarning,
                stacklevel=2,
            )
            x = None
    if x is None:
        with warnings.catch_warnings():
            # scipy warns on exact zero pivots; the explicit check below raises instead
            warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
            lu, piv = scipy.linalg.lu_factor(system.matrix, check_finite=False)
        pivots = np.abs(np.diag(lu))
        tol = np.finfo(float).eps * system.size * pivots.max(initial=0.0)
        bad = np.flatnonzero(pivots <= tol)
        if pivots.max(initial=0.0) == 0.0 or bad.size:
            index = int(bad[0]) if bad.size else 0
            raise SolverError(
                f"matrix is singular to working precision (pivot {index} = "
                f"{pivots[index] if pivots.size else 0.0:.3e})"
            )
        x = scipy.linalg.lu_solve((lu, piv), b, check_finite=False)

    residual = np.abs(system.matrix @ x - b).max(initial=0.0)
    bound = 1e-9 * (1.0 + np.abs(b).max(initial=0.0))
    if not np.isfinite(residual) or residual >= bound:
        raise SolverError(
            f"solve residual {residual:.3e} exceeds bound {bound:.3e}; "
            "system is numerically unusable"
        )
    return x[:, 0] if squeeze else x


def pivot_ratio(matrix: np.ndarray) -> float:
    """Max/min pivot magnitude ratio, a cheap conditioning hint."""
    matrix = np.asarray(matrix, dtype=float)
    try:
        d = np.abs(np.diag(np.linalg.cholesky(matrix)))
    except np.linalg.LinAlgError:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
            lu, _ = scipy.linalg.lu_factor(matrix, check_finite=False)
        d = np.abs(np.diag(lu))
    if d.size == 0 or d.min() == 0.0:
        return float("inf")
    return float(d.max() / d.min())


def finite_diff_gradient(f, x, step: float = DEFAULT_FD_STEP) -> np.ndarray:
    """Central-difference gradient (f(x + h e_i) - f(x - h e_i)) / 2h."""
    if not step > 0.0:
        raise ConfigurationError("finite-difference step must be positive")
    x = np.array(x, dtype=float)  # private copy; f sees perturbed snapshots only
    grad = np.empty(x.size)
    flat = x.ravel()
    for i in range(flat.size):
        saved = flat[i]
        flat[i] = saved + step
        hi = float(f(x))
        flat[i] = saved - step
        lo = float(f(x))
        flat[i] = saved
        grad[i] = (hi - lo) / (2.0 * step)
    return grad


class RngStream:
    """One independent, reproducible random substream.

    Streams with equal (seed, stream_id) replay identical draw sequences;
    distinct ids give statistically independent streams. A stream is stateful
    and must not be shared across concurrent workers.
    """

    def __init__(self, seed: int, stream_id: int = 0):
        if not isinstance(seed, (int, np.integer)) or isinstance(seed, bool) or seed < 0:
            raise ConfigurationError("seed must be a nonnegative integer")
        if not isinstance(stream_id, (int, np.integer)) or stream_id < 0:
            raise ConfigurationError("stream_id must be a nonnegative integer")
        self.seed = int(seed)
        self.stream_id = int(stream_id)
        self._gen = np.random.default_rng(np.random.SeedSequence((self.seed, self.stream_id)))

    def uniform(self, low: float = 0.0, high: float = 1.0, size=None):
        return self._gen.uniform(low, high, size=size)

    def __repr__(self):
        return f"RngStream(seed={self.seed}, stream_id={self.stream_id})"
