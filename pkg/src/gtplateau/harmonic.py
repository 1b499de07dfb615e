"""Reconstruction of unknown control points from harmonicity.

In the Bernstein setting the Laplacian of a patch is itself a degree-(m, n)
Bernstein surface whose coefficients are linear in the control points: the
second differences in each direction, degree-elevated back up by two. Setting
every Laplacian coefficient to zero yields a linear system in the unknown
points, solved here in the least-squares sense that actually minimizes the
integrated squared Laplacian (coefficient equations weighted by the Bernstein
Gram matrix), so the result coincides with direct minimization of the defect
even when the data admit no exactly harmonic completion.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import ConfigurationError, ReconstructionError
from .numerics import QuadratureRule
from .patch import ControlNet, Patch, SurfaceShape, laplacian_defect

#: Certificate threshold scale: defect < 1e-8 * (1 + scale^2).
CERTIFICATE_FACTOR = 1e-8


def elevation_coefficients(degree: int) -> np.ndarray:
    """Weights (a_k, b_k, c_k) expressing a degree-(n-2) Bernstein function in degree n.

    Row k (k = 0..n-2) holds a_k = (n-k)(n-k-1), b_k = 2(k+1)(n-k-1),
    c_k = (k+1)(k+2); each row sums to n(n+1).
    """
    if not isinstance(degree, (int, np.integer)) or degree < 2:
        raise ConfigurationError("elevation coefficients need degree >= 2")
    n = int(degree)
    k = np.arange(n - 1)
    return np.stack(
        [
            (n - k) * (n - k - 1.0),
            2.0 * (k + 1) * (n - k - 1.0),
            (k + 1) * (k + 2.0),
        ],
        axis=1,
    )


def _direction_operator(degree: int) -> np.ndarray:
    """Matrix taking control values to the direction's Laplacian coefficients.

    Composition of the second-difference stencil with the two-step degree
    elevation; the derivative prefactors n(n-1) cancel exactly against the
    elevation denominators, so none appear here.
    """
    coeff = elevation_coefficients(degree)
    size = degree + 1
    elevate = np.zeros((size, degree - 1))
    for k in range(degree - 1):
        elevate[k, k] = coeff[k, 0]
        elevate[k + 1, k] = coeff[k, 1]
        elevate[k + 2, k] = coeff[k, 2]
    second_diff = np.zeros((degree - 1, size))
    for i in range(degree - 1):
        second_diff[i, i] = 1.0
        second_diff[i, i + 1] = -2.0
        second_diff[i, i + 2] = 1.0
    return elevate @ second_diff


def laplacian_coefficient_operator(degree_u: int, degree_v: int) -> np.ndarray:
    """Flat linear map from grid points to the Bernstein coefficients of S_uu + S_vv.

    Acts on row-major flattened (m+1) x (n+1) grids, one coordinate channel at
    a time.
    """
    ku = _direction_operator(degree_u)
    kv = _direction_operator(degree_v)
    return np.kron(ku, np.eye(degree_v + 1)) + np.kron(np.eye(degree_u + 1), kv)


def bernstein_gram(degree: int) -> np.ndarray:
    """Closed-form products int B_i B_k dt = C(d,i) C(d,k) / (C(2d,i+k) (2d+1))."""
    d = int(degree)
    idx = np.arange(d + 1)
    comb_d = np.array([math.comb(d, int(i)) for i in idx], dtype=float)
    comb_2d = np.array([math.comb(2 * d, int(s)) for s in range(2 * d + 1)], dtype=float)
    return comb_d[:, None] * comb_d[None, :] / (comb_2d[idx[:, None] + idx[None, :]] * (2 * d + 1))


def defect_certificate_bound(net: ControlNet) -> float:
    return CERTIFICATE_FACTOR * (1.0 + net.scale() ** 2)


def harmonic_reconstruct(net: ControlNet, degrees: tuple[int, int] | None = None) -> ControlNet:
    """Fill unknown points so the Bernstein patch is as harmonic as possible.

    Unknowns may sit anywhere, but the four corners must be known. The
    equations are the full set of Laplacian coefficients (out-of-range
    elevation terms simply never arise), weighted so the least-squares
    minimum is the true integrated defect minimum. Rank deficiency (too
    little known data) raises a reconstruction error naming the deficiency.
    """
    if degrees is not None and tuple(degrees) != (net.degree_u, net.degree_v):
        raise ConfigurationError(
            f"requested degrees {tuple(degrees)} do not match the net "
            f"({net.degree_u}, {net.degree_v})"
        )
    if net.degree_u < 2 or net.degree_v < 2:
        raise ConfigurationError("harmonic reconstruction needs degree >= 2 in each direction")
    corner_fixed = net.fixed[[0, 0, -1, -1], [0, -1, 0, -1]]
    if not corner_fixed.all():
        raise ConfigurationError("harmonic reconstruction requires all four corners known")

    free_flat = net.free.ravel()
    unknowns = int(free_flat.sum())
    if unknowns == 0:
        return net.copy()

    operator = laplacian_coefficient_operator(net.degree_u, net.degree_v)
    known_points = np.where(net.fixed[..., None], net.points, 0.0).reshape(-1, 3)
    rhs = -(operator[:, ~free_flat] @ known_points[~free_flat])
    coefficient_matrix = operator[:, free_flat]

    # weight by the L2 inner product of the coefficient space
    gram = np.kron(bernstein_gram(net.degree_u), bernstein_gram(net.degree_v))
    weight = np.linalg.cholesky(gram).T
    solution, _, rank, _ = np.linalg.lstsq(weight @ coefficient_matrix, weight @ rhs, rcond=None)
    if rank < unknowns:
        raise ReconstructionError(
            f"harmonic system is rank deficient: rank {rank} < {unknowns} unknowns; "
            "the known points do not determine the rest"
        )

    result = net.copy()
    result.points[net.free] = solution
    return result


def bernstein_laplacian_defect(net: ControlNet, rule: QuadratureRule) -> float:
    """Certificate value: integrated squared Laplacian of the Bernstein patch."""
    if not net.is_complete:
        raise ConfigurationError("defect requires a fully known net")
    return laplacian_defect(Patch.bernstein(net), rule)


def defect_objective(net: ControlNet, shape: SurfaceShape, rule: QuadratureRule) -> float:
    """The tuning target F(alpha): Laplacian defect of the GT patch on this net."""
    if not net.is_complete:
        raise ConfigurationError("defect objective requires a fully known net")
    return laplacian_defect(Patch.gt(net, shape), rule)
