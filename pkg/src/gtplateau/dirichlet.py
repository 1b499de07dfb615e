"""Interior control points extremizing the Dirichlet energy.

The energy is quadratic in the interior points, so stationarity is a single
symmetric positive-definite linear system shared by the x/y/z coordinates
(one matrix, three right-hand sides). Two independent assembly routes are
provided:

* ``assemble_system`` gathers the separated 1-D integral coefficients of the
  difference-form first variation (the production route), and
* ``assemble_system_generic`` builds the same normal equations directly from
  the gradient fields of the unknowns' scalar coefficient functions.

Both integrate with the same quadrature rule, so they agree to rounding; the
generic route also serves lower-degree cases the difference form cannot reach
(the GT family has no degree-1 member) and powers the blended-patch solver.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .basis import BasisSpec, basis_tables
from .errors import ConfigurationError, SolverError
from .numerics import DenseSystem, QuadratureRule, pivot_ratio, solve_dense
from .patch import ControlNet, Patch, SurfaceShape, dirichlet_energy


@dataclass(frozen=True)
class StiffnessCoefficients:
    """Separated 1-D integrals feeding the difference-form assembly.

    With m, n the directional degrees, rows cover the interior index ranges
    k = 1..m-1 and l = 1..n-1:

    * I1[k,i] = int G'_{k,m} (G_{i,m-1} + u G'_{i,m-1}) du     (m-1) x m
    * I2[k,i] = int G'_{k,m} G'_{i,m-1} du                     (m-1) x m
    * I3[k,i] = int G_{k,m} G_{i,m} du                         (m-1) x (m+1)
    * J1[l,j] = int G_{l,n} G_{j,n} dv                         (n-1) x (n+1)
    * J2[l,j] = int G'_{l,n} (G_{j,n-1} + v G'_{j,n-1}) dv     (n-1) x n
    * J3[l,j] = int G'_{l,n} G'_{j,n-1} dv                     (n-1) x n
    """

    I1: np.ndarray
    I2: np.ndarray
    I3: np.ndarray
    J1: np.ndarray
    J2: np.ndarray
    J3: np.ndarray


def _difference_route_supported(spec: BasisSpec) -> bool:
    # the integrands reference the degree-(m-1) family, which for GT needs m-1 >= 2
    if spec.family == "gt":
        return spec.degree >= 3
    return spec.degree >= 2


def _describe(spec: BasisSpec) -> str:
    if spec.family == "gt":
        return f"gt(degree={spec.degree}, theta=({spec.shape.theta1}, {spec.shape.theta2}))"
    return f"bernstein(degree={spec.degree})"


def assemble_coefficients(
    basis_u: BasisSpec, basis_v: BasisSpec, rule: QuadratureRule
) -> StiffnessCoefficients:
    """Quadrature values of the separated stiffness integrals."""
    for spec in (basis_u, basis_v):
        if not _difference_route_supported(spec):
            raise ConfigurationError(
                f"difference-form coefficients need degree >= "
                f"{3 if spec.family == 'gt' else 2}, got {_describe(spec)}"
            )
    t = rule.nodes
    w = rule.weights

    tu = basis_tables(basis_u, t)
    tu_low = basis_tables(basis_u.lower(), t)
    m = basis_u.degree
    i1 = (tu.first[1:m] * w) @ (tu_low.values + t * tu_low.first).T
    i2 = (tu.first[1:m] * w) @ tu_low.first.T
    i3 = (tu.values[1:m] * w) @ tu.values.T

    tv = basis_tables(basis_v, t)
    tv_low = basis_tables(basis_v.lower(), t)
    n = basis_v.degree
    j1 = (tv.values[1:n] * w) @ tv.values.T
    j2 = (tv.first[1:n] * w) @ (tv_low.values + t * tv_low.first).T
    j3 = (tv.first[1:n] * w) @ tv_low.first.T

    return StiffnessCoefficients(I1=i1, I2=i2, I3=i3, J1=j1, J2=j2, J3=j3)


def _require_plateau(net: ControlNet) -> np.ndarray:
    if not net.boundary_is_fixed():
        raise ConfigurationError("Plateau-type solves require every boundary point fixed")
    free = net.free
    if not free.any():
        raise ConfigurationError("empty system: the net has no unknown interior points")
    return free


def assemble_system(net: ControlNet, coeffs: StiffnessCoefficients) -> DenseSystem:
    """Normal equations gathered from the difference-form first variation.

    Row (k, l) collects, for every control point P_ab, the coefficient
    Cu[k,a] J1[l,b] + I3[k,a] Cv[l,b], where Cu and Cv are index-shifted
    combinations of the separated integrals (the first differences pair I1/J2
    with consecutive points). Columns of fixed points move to the right-hand
    side; unknown ordering is row-major over the grid.
    """
    free = _require_plateau(net)
    m, n = net.degree_u, net.degree_v
    if coeffs.I3.shape != (m - 1, m + 1) or coeffs.J1.shape != (n - 1, n + 1):
        raise ConfigurationError("stiffness coefficients do not match the net degrees")

    cu = np.zeros((m - 1, m + 1))
    cu[:, 1:] += coeffs.I1
    cu[:, :-1] -= coeffs.I1
    cu[:, :-1] += coeffs.I2
    cv = np.zeros((n - 1, n + 1))
    cv[:, 1:] += coeffs.J2
    cv[:, :-1] -= coeffs.J2
    cv[:, :-1] += coeffs.J3

    full = np.einsum("ka,lb->klab", cu, coeffs.J1) + np.einsum("ka,lb->klab", coeffs.I3, cv)
    flat = full.reshape((m - 1) * (n - 1), (m + 1) * (n + 1))

    free_rows = free[1:m, 1:n].ravel()
    free_cols = free.ravel()
    rows = flat[free_rows]
    matrix = rows[:, free_cols]
    fixed_points = net.points.reshape(-1, 3)[~free_cols]
    rhs = -(rows[:, ~free_cols] @ fixed_points)
    return DenseSystem(matrix=matrix, rhs=rhs, symmetric=True)


def gradient_normal_system(phi_u, phi_v, fixed_su, fixed_sv, rule: QuadratureRule) -> DenseSystem:
    """Normal equations for any surface affine in its unknowns.

    ``phi_u``/``phi_v`` hold the gradient grids (q, U, V) of each unknown's
    scalar coefficient field on the tensor quadrature grid; ``fixed_su``/
    ``fixed_sv`` are the (U, V, 3) gradients of the fully known part. This is
    the shared engine behind the generic tensor-patch route and the blended
    -patch interior solve.
    """
    w2 = np.outer(rule.weights, rule.weights)
    pu = phi_u * w2
    pv = phi_v * w2
    matrix = np.tensordot(pu, phi_u, axes=([1, 2], [1, 2])) + np.tensordot(
        pv, phi_v, axes=([1, 2], [1, 2])
    )
    rhs = -(
        np.tensordot(pu, fixed_su, axes=([1, 2], [0, 1]))
        + np.tensordot(pv, fixed_sv, axes=([1, 2], [0, 1]))
    )
    return DenseSystem(matrix=matrix, rhs=rhs, symmetric=True)


def assemble_system_generic(
    net: ControlNet, basis_u: BasisSpec, basis_v: BasisSpec, rule: QuadratureRule
) -> DenseSystem:
    """Normal equations from first principles: A[q,r] = intgrl <grad phi_q, grad phi_r>.

    phi for unknown P_ab is the scalar field G_a(u) G_b(v); the fixed part
    enters through its gradient. Independent of assemble_system (no shared
    integrals), used as its oracle and as the fallback for degrees the
    difference form cannot serve.
    """
    free = _require_plateau(net)
    tu = basis_tables(basis_u, rule.nodes)
    tv = basis_tables(basis_v, rule.nodes)

    fi, fj = np.nonzero(free)
    phi_u = tu.first[fi][:, :, None] * tv.values[fj][:, None, :]
    phi_v = tu.values[fi][:, :, None] * tv.first[fj][:, None, :]

    anchored = np.where(net.fixed[..., None], net.points, 0.0)
    fixed_su = np.einsum("iu,jv,ijc->uvc", tu.first, tv.values, anchored)
    fixed_sv = np.einsum("iu,jv,ijc->uvc", tu.values, tv.first, anchored)
    return gradient_normal_system(phi_u, phi_v, fixed_su, fixed_sv, rule)


@dataclass
class ExtremalSolution:
    """A solved net plus the numbers a caller usually reports."""

    net: ControlNet
    energy: float
    system_condition_hint: float
    route: str


def solve_interior(
    net: ControlNet,
    basis_u: BasisSpec,
    basis_v: BasisSpec,
    rule: QuadratureRule,
    route: str = "auto",
) -> ExtremalSolution:
    """Fill the unknown interior points with the Dirichlet extremal.

    Fixed points are carried over bit for bit. ``route`` picks the assembly:
    "difference" (production), "generic" (first-principles), or "auto" to use
    the difference form whenever the degrees allow it.
    """
    if basis_u.degree != net.degree_u or basis_v.degree != net.degree_v:
        raise ConfigurationError("basis degrees must match the net")
    if route == "auto":
        route = (
            "difference"
            if _difference_route_supported(basis_u) and _difference_route_supported(basis_v)
            else "generic"
        )
    if route == "difference":
        system = assemble_system(net, assemble_coefficients(basis_u, basis_v, rule))
    elif route == "generic":
        system = assemble_system_generic(net, basis_u, basis_v, rule)
    else:
        raise ConfigurationError(f"unknown assembly route {route!r}")

    try:
        solution = solve_dense(system, spd_hint=True)
    except SolverError as exc:
        raise SolverError(
            f"{exc} [bases: {_describe(basis_u)} x {_describe(basis_v)}]"
        ) from exc

    filled = net.copy()
    filled.points[net.free] = solution
    energy = dirichlet_energy(Patch(basis_u=basis_u, basis_v=basis_v, net=filled), rule)
    return ExtremalSolution(
        net=filled,
        energy=energy,
        system_condition_hint=pivot_ratio(system.matrix),
        route=route,
    )


def reduced_functional(net: ControlNet, shape: SurfaceShape, rule: QuadratureRule) -> float:
    """J(alpha): energy of the GT Dirichlet extremal on the given boundary."""
    bu, bv = shape.basis_specs(net.degree_u, net.degree_v)
    return solve_interior(net, bu, bv, rule).energy
