"""Univariate basis families with values and first/second derivatives.

Two families are supported:

* the classical Bernstein basis of any degree, and
* a generalized trigonometric (GT) basis of degree >= 2, built from a
  two-parameter quadratic trigonometric seed by repeated Bezier-style degree
  elevation ``G_{k,n} = (1-t) G_{k,n-1} + t G_{k-1,n-1}`` (terms with k out of
  range are zero).

Derivatives of the GT family follow the differentiated elevation recursion,
seeded with the analytic derivatives of the trigonometric seed, so the
recursion base is exact and error does not accumulate through elevation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, DomainError

#: Admissible closed interval for every shape parameter.
THETA_MIN = 0.5
THETA_MAX = 3.5

_HALF_PI = 0.5 * np.pi


@dataclass(frozen=True)
class ShapePair:
    """Shape-parameter pair (theta1, theta2) of one parametric direction."""

    theta1: float
    theta2: float

    def __post_init__(self):
        for name, value in (("theta1", self.theta1), ("theta2", self.theta2)):
            value = float(value)
            if not np.isfinite(value) or not THETA_MIN <= value <= THETA_MAX:
                raise DomainError(
                    f"{name} must lie in [{THETA_MIN}, {THETA_MAX}], got {value!r}"
                )
            object.__setattr__(self, name, value)


@dataclass(frozen=True)
class BasisSpec:
    """A basis family selection: Bernstein of degree >= 0, or GT of degree >= 2.

    ``shape`` is required for the GT family and must be None for Bernstein.
    """

    family: str
    degree: int
    shape: ShapePair | None = None

    def __post_init__(self):
        if self.family not in ("bernstein", "gt"):
            raise ConfigurationError(f"unknown basis family {self.family!r}")
        if not isinstance(self.degree, (int, np.integer)) or isinstance(self.degree, bool):
            raise ConfigurationError("degree must be an integer")
        object.__setattr__(self, "degree", int(self.degree))
        if self.family == "bernstein":
            if self.degree < 0:
                raise ConfigurationError("Bernstein degree must be >= 0")
            if self.shape is not None:
                raise ConfigurationError("Bernstein basis takes no shape parameters")
        else:
            if self.degree < 2:
                raise ConfigurationError("GT degree must be >= 2 (the seed is quadratic)")
            if not isinstance(self.shape, ShapePair):
                raise ConfigurationError("GT basis requires a ShapePair")

    @classmethod
    def bernstein(cls, degree: int) -> "BasisSpec":
        return cls(family="bernstein", degree=degree)

    @classmethod
    def gt(cls, degree: int, theta1: float, theta2: float) -> "BasisSpec":
        return cls(family="gt", degree=degree, shape=ShapePair(theta1, theta2))

    def lower(self) -> "BasisSpec":
        """Same family and shape, one degree lower (needed by difference forms)."""
        if self.family == "bernstein":
            if self.degree < 1:
                raise ConfigurationError("no Bernstein basis below degree 0")
            return BasisSpec(family="bernstein", degree=self.degree - 1)
        if self.degree < 3:
            raise ConfigurationError("no GT basis below degree 2")
        return BasisSpec(family="gt", degree=self.degree - 1, shape=self.shape)


@dataclass(frozen=True)
class BasisEvaluation:
    """Basis values and derivatives; rows k = 0..degree, columns follow t."""

    values: np.ndarray
    first: np.ndarray
    second: np.ndarray


def _check_t(t) -> np.ndarray:
    t = np.atleast_1d(np.asarray(t, dtype=float))
    if t.ndim != 1:
        raise DomainError("t must be a scalar or a 1-D array")
    if t.size and (not np.all(np.isfinite(t)) or t.min() < 0.0 or t.max() > 1.0):
        raise DomainError("t must lie in [0, 1]")
    return t


def _bernstein_values(degree: int, t: np.ndarray) -> np.ndarray:
    k = np.arange(degree + 1)
    coeff = np.array([math.comb(degree, int(i)) for i in k], dtype=float)
    return coeff[:, None] * t[None, :] ** k[:, None] * (1.0 - t)[None, :] ** (degree - k)[:, None]


def _bernstein_tables(degree: int, t: np.ndarray):
    values = _bernstein_values(degree, t)
    first = np.zeros_like(values)
    second = np.zeros_like(values)
    if degree >= 1:
        low = _bernstein_values(degree - 1, t)
        first[:-1] -= low
        first[1:] += low
        first *= degree
    if degree >= 2:
        low2 = _bernstein_values(degree - 2, t)
        second[:-2] += low2
        second[1:-1] -= 2.0 * low2
        second[2:] += low2
        second *= degree * (degree - 1)
    return values, first, second


def _gt_seed_tables(shape: ShapePair, t: np.ndarray):
    """Quadratic seed values and analytic derivatives, rows k = 0, 1, 2."""
    th1, th2 = shape.theta1, shape.theta2
    s = np.sin(_HALF_PI * t)
    c = np.cos(_HALF_PI * t)

    g0 = 0.5 * th1 * (s * s - s) + c * c
    g2 = 0.5 * th2 * (c * c - c) + s * s
    g1 = 1.0 - g0 - g2

    a = 0.5 * th1 * (2.0 * s - 1.0) - 2.0 * s
    b = 0.5 * th2 * (1.0 - 2.0 * c) + 2.0 * c
    d0 = _HALF_PI * c * a
    d2 = _HALF_PI * s * b
    d1 = -d0 - d2

    dd0 = _HALF_PI**2 * (-s * a + c * c * (th1 - 2.0))
    dd2 = _HALF_PI**2 * (c * b + s * s * (th2 - 2.0))
    dd1 = -dd0 - dd2

    return np.stack([g0, g1, g2]), np.stack([d0, d1, d2]), np.stack([dd0, dd1, dd2])


def _elevate(values, first, second, t):
    """One degree-elevation step applied to value/derivative tables."""
    zero = np.zeros((1, t.size))
    lo_v, hi_v = np.vstack([values, zero]), np.vstack([zero, values])
    lo_1, hi_1 = np.vstack([first, zero]), np.vstack([zero, first])
    lo_2, hi_2 = np.vstack([second, zero]), np.vstack([zero, second])
    w = 1.0 - t
    return (
        w * lo_v + t * hi_v,
        -lo_v + w * lo_1 + hi_v + t * hi_1,
        -2.0 * lo_1 + w * lo_2 + 2.0 * hi_1 + t * hi_2,
    )


def basis_tables(spec: BasisSpec, t) -> BasisEvaluation:
    """Evaluate a whole basis family on an array of parameters.

    Returns arrays of shape (degree + 1, len(t)). This is the workhorse used
    by the surface, assembly, and blending modules.
    """
    t = _check_t(t)
    if spec.family == "bernstein":
        values, first, second = _bernstein_tables(spec.degree, t)
    else:
        values, first, second = _gt_seed_tables(spec.shape, t)
        for _ in range(spec.degree - 2):
            values, first, second = _elevate(values, first, second, t)
    return BasisEvaluation(values=values, first=first, second=second)


def _scalar_evaluation(spec: BasisSpec, t) -> BasisEvaluation:
    t_arr = np.asarray(t, dtype=float)
    if t_arr.ndim != 0:
        raise DomainError("t must be a scalar")
    tables = basis_tables(spec, t_arr[None])
    return BasisEvaluation(
        values=tables.values[:, 0],
        first=tables.first[:, 0],
        second=tables.second[:, 0],
    )


def eval_bernstein(degree: int, t) -> BasisEvaluation:
    """Bernstein values C(d,k) t^k (1-t)^(d-k) and derivatives at one t."""
    return _scalar_evaluation(BasisSpec.bernstein(degree), t)


def eval_gt(spec: BasisSpec, t) -> BasisEvaluation:
    """GT basis values and derivatives at one t."""
    if spec.family != "gt":
        raise ConfigurationError("eval_gt requires a GT BasisSpec")
    return _scalar_evaluation(spec, t)


def curve_point_and_curvature(spec: BasisSpec, controls, t):
    """Point and signed curvature of a planar curve F(t) = sum_k G_k(t) b_k.

    kappa = det(F', F'') / |F'|^3; a vanishing tangent makes the curvature
    undefined and raises a domain error.
    """
    controls = np.asarray(controls, dtype=float)
    if controls.ndim != 2 or controls.shape != (spec.degree + 1, 2):
        raise ConfigurationError(
            f"controls must have shape ({spec.degree + 1}, 2) for degree {spec.degree}"
        )
    ev = _scalar_evaluation(spec, t)
    point = ev.values @ controls
    d1 = ev.first @ controls
    d2 = ev.second @ controls
    speed = float(np.hypot(d1[0], d1[1]))
    if speed <= 1e-12:
        raise DomainError(f"curvature undefined at t={float(t)}: tangent vanishes")
    kappa = float((d1[0] * d2[1] - d1[1] * d2[0]) / speed**3)
    return point, kappa
