"""Tensor-product surface patches over any pair of basis specs.

A patch is ``S(u, v) = sum_ij P_ij G_i(u) G_j(v)`` with independent basis
families per direction (Bernstein x Bernstein, GT x GT, or mixed). The module
provides evaluation, first/second partials (with an independent difference
form retained as a cross-check), the Dirichlet energy, surface area, Laplacian
defect, mean-curvature grids, and uniform tessellation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .basis import BasisSpec, ShapePair, basis_tables
from .errors import ConfigurationError, DomainError
from .numerics import QuadratureRule


@dataclass(frozen=True)
class SurfaceShape:
    """Surface-level shape vector (alpha1, alpha2, beta1, beta2).

    The first pair modulates the u-direction basis, the second the
    v-direction; every component must lie in the admissible interval.
    """

    alpha1: float
    alpha2: float
    beta1: float
    beta2: float

    def __post_init__(self):
        # ShapePair construction performs the interval validation
        u = ShapePair(self.alpha1, self.alpha2)
        v = ShapePair(self.beta1, self.beta2)
        object.__setattr__(self, "alpha1", u.theta1)
        object.__setattr__(self, "alpha2", u.theta2)
        object.__setattr__(self, "beta1", v.theta1)
        object.__setattr__(self, "beta2", v.theta2)

    @property
    def u_pair(self) -> ShapePair:
        return ShapePair(self.alpha1, self.alpha2)

    @property
    def v_pair(self) -> ShapePair:
        return ShapePair(self.beta1, self.beta2)

    @classmethod
    def from_iterable(cls, values) -> "SurfaceShape":
        values = list(values)
        if len(values) != 4:
            raise ConfigurationError("a surface shape needs exactly 4 components")
        return cls(*(float(v) for v in values))

    def as_array(self) -> np.ndarray:
        return np.array([self.alpha1, self.alpha2, self.beta1, self.beta2])

    def basis_specs(self, degree_u: int, degree_v: int) -> tuple[BasisSpec, BasisSpec]:
        """GT basis pair of the given degrees carrying this shape vector."""
        return (
            BasisSpec(family="gt", degree=degree_u, shape=self.u_pair),
            BasisSpec(family="gt", degree=degree_v, shape=self.v_pair),
        )


def boundary_mask(rows: int, cols: int) -> np.ndarray:
    mask = np.zeros((rows, cols), dtype=bool)
    mask[0, :] = mask[-1, :] = True
    mask[:, 0] = mask[:, -1] = True
    return mask


@dataclass
class ControlNet:
    """A (m+1) x (n+1) grid of 3-D control points with a fixed/known mask.

    Entries not marked fixed may be NaN (unknown, to be solved for). The
    default mask marks exactly the finite entries as fixed, which matches the
    usual file convention of nulls for unknowns.
    """

    points: np.ndarray
    fixed: np.ndarray | None = None

    def __post_init__(self):
        points = np.array(self.points, dtype=float)
        if points.ndim != 3 or points.shape[2] != 3:
            raise ConfigurationError("points must be a (rows, cols, 3) array")
        if points.shape[0] < 2 or points.shape[1] < 2:
            raise ConfigurationError("a control net needs at least 2 points per direction")
        finite = np.all(np.isfinite(points), axis=-1)
        if self.fixed is None:
            fixed = finite.copy()
        else:
            fixed = np.array(self.fixed, dtype=bool)
            if fixed.shape != points.shape[:2]:
                raise ConfigurationError("fixed mask shape must match the point grid")
            if np.any(fixed & ~finite):
                raise ConfigurationError("fixed control points must have finite coordinates")
        self.points = points
        self.fixed = fixed

    @property
    def degree_u(self) -> int:
        return self.points.shape[0] - 1

    @property
    def degree_v(self) -> int:
        return self.points.shape[1] - 1

    @property
    def free(self) -> np.ndarray:
        return ~self.fixed

    @property
    def is_complete(self) -> bool:
        return bool(np.all(np.isfinite(self.points)))

    def boundary_is_fixed(self) -> bool:
        """True when every boundary entry is fixed (equivalently: free cells are interior)."""
        return bool(np.all(self.fixed[boundary_mask(*self.fixed.shape)]))

    def copy(self) -> "ControlNet":
        return ControlNet(points=self.points.copy(), fixed=self.fixed.copy())

    def scale(self) -> float:
        """Largest coordinate magnitude among known points (0 if none)."""
        known = self.points[self.fixed]
        if known.size == 0:
            return 0.0
        return float(np.abs(known).max())


@dataclass(frozen=True)
class Patch:
    """A fully determined tensor-product surface."""

    basis_u: BasisSpec
    basis_v: BasisSpec
    net: ControlNet

    def __post_init__(self):
        if self.basis_u.degree != self.net.degree_u or self.basis_v.degree != self.net.degree_v:
            raise ConfigurationError(
                f"basis degrees ({self.basis_u.degree}, {self.basis_v.degree}) do not match "
                f"net degrees ({self.net.degree_u}, {self.net.degree_v})"
            )
        if not self.net.is_complete:
            raise ConfigurationError("patch requires a fully known control net")

    @classmethod
    def bernstein(cls, net: ControlNet) -> "Patch":
        return cls(
            basis_u=BasisSpec.bernstein(net.degree_u),
            basis_v=BasisSpec.bernstein(net.degree_v),
            net=net,
        )

    @classmethod
    def gt(cls, net: ControlNet, shape: SurfaceShape) -> "Patch":
        bu, bv = shape.basis_specs(net.degree_u, net.degree_v)
        return cls(basis_u=bu, basis_v=bv, net=net)


def _check_params(us, vs):
    us = np.atleast_1d(np.asarray(us, dtype=float))
    vs = np.atleast_1d(np.asarray(vs, dtype=float))
    for arr in (us, vs):
        if arr.size and (not np.all(np.isfinite(arr)) or arr.min() < 0.0 or arr.max() > 1.0):
            raise DomainError("surface parameters must lie in [0, 1]")
    return us, vs


def _contract(table_u: np.ndarray, table_v: np.ndarray, points: np.ndarray) -> np.ndarray:
    """(m+1,U), (n+1,V), (m+1,n+1,3) -> (U,V,3)."""
    partial = np.tensordot(table_u.T, points, axes=(1, 0))
    return np.tensordot(partial, table_v, axes=(1, 0)).transpose(0, 2, 1)


def evaluate_grid(patch: Patch, us, vs) -> np.ndarray:
    us, vs = _check_params(us, vs)
    tu = basis_tables(patch.basis_u, us)
    tv = basis_tables(patch.basis_v, vs)
    return _contract(tu.values, tv.values, patch.net.points)


def partial_grids(patch: Patch, us, vs) -> tuple[np.ndarray, np.ndarray]:
    us, vs = _check_params(us, vs)
    tu = basis_tables(patch.basis_u, us)
    tv = basis_tables(patch.basis_v, vs)
    su = _contract(tu.first, tv.values, patch.net.points)
    sv = _contract(tu.values, tv.first, patch.net.points)
    return su, sv


def second_partial_grids(patch: Patch, us, vs):
    us, vs = _check_params(us, vs)
    tu = basis_tables(patch.basis_u, us)
    tv = basis_tables(patch.basis_v, vs)
    p = patch.net.points
    suu = _contract(tu.second, tv.values, p)
    suv = _contract(tu.first, tv.first, p)
    svv = _contract(tu.values, tv.second, p)
    return suu, suv, svv


def evaluate(patch: Patch, u, v) -> np.ndarray:
    """S(u, v) as a 3-vector."""
    return evaluate_grid(patch, [u], [v])[0, 0]


def partials(patch: Patch, u, v) -> tuple[np.ndarray, np.ndarray]:
    """(S_u, S_v) by termwise differentiation (production path)."""
    su, sv = partial_grids(patch, [u], [v])
    return su[0, 0], sv[0, 0]


def partials_difference(patch: Patch, u, v) -> tuple[np.ndarray, np.ndarray]:
    """(S_u, S_v) via the lower-degree difference identity (cross-check path).

    Writing C_i(v) for the v-contracted control rows, the elevation recursion
    gives S_u = sum_i (g_i + u g_i') dC_i + sum_i g_i' C_i with g_i the
    degree-(m-1) basis of the same family and shape, and symmetrically in v.
    Requires the lower-degree basis to exist (GT degree >= 3).
    """
    us, vs = _check_params(u, v)
    tu = basis_tables(patch.basis_u, us)
    tv = basis_tables(patch.basis_v, vs)
    lu = basis_tables(patch.basis_u.lower(), us)
    lv = basis_tables(patch.basis_v.lower(), vs)
    p = patch.net.points

    rows = np.einsum("jt,ijc->ic", tv.values, p)  # C_i(v), shape (m+1, 3)
    drows = np.diff(rows, axis=0)
    gu = lu.values[:, 0] + us[0] * lu.first[:, 0]
    su = gu @ drows + lu.first[:, 0] @ rows[:-1]

    cols = np.einsum("it,ijc->jc", tu.values, p)  # C_j(u), shape (n+1, 3)
    dcols = np.diff(cols, axis=0)
    gv = lv.values[:, 0] + vs[0] * lv.first[:, 0]
    sv = gv @ dcols + lv.first[:, 0] @ cols[:-1]
    return su, sv


def second_partials(patch: Patch, u, v):
    """(S_uu, S_uv, S_vv) as 3-vectors."""
    suu, suv, svv = second_partial_grids(patch, [u], [v])
    return suu[0, 0], suv[0, 0], svv[0, 0]


def dirichlet_energy(patch: Patch, rule: QuadratureRule) -> float:
    """(1/2) integral of |S_u|^2 + |S_v|^2 over the unit square."""
    su, sv = partial_grids(patch, rule.nodes, rule.nodes)
    integrand = 0.5 * ((su * su).sum(axis=-1) + (sv * sv).sum(axis=-1))
    return float(rule.weights @ integrand @ rule.weights)


def area(patch: Patch, rule: QuadratureRule) -> float:
    """Integral of |S_u x S_v| over the unit square."""
    su, sv = partial_grids(patch, rule.nodes, rule.nodes)
    integrand = np.linalg.norm(np.cross(su, sv), axis=-1)
    return float(rule.weights @ integrand @ rule.weights)


def laplacian_defect(patch: Patch, rule: QuadratureRule) -> float:
    """Integral of |S_uu + S_vv|^2 over the unit square."""
    suu, _, svv = second_partial_grids(patch, rule.nodes, rule.nodes)
    lap = suu + svv
    integrand = (lap * lap).sum(axis=-1)
    return float(rule.weights @ integrand @ rule.weights)


@dataclass(frozen=True)
class FundamentalForms:
    """First and second fundamental form coefficients plus mean curvature.

    Fields are arrays over the sampled grid; H is NaN where the
    parameterization is too close to degenerate for a reliable normal.
    """

    E: np.ndarray
    F: np.ndarray
    G: np.ndarray
    L: np.ndarray
    M: np.ndarray
    N: np.ndarray
    H: np.ndarray

    def __post_init__(self):
        disc = self.E * self.G - self.F**2
        if np.any(self.E < 0.0) or np.any(self.G < 0.0):
            raise ConfigurationError("first-form diagonal must be nonnegative")
        if np.any(disc < -1e-12 * (self.E * self.G + 1.0)):
            raise ConfigurationError("first-form discriminant violates Cauchy-Schwarz")


def fundamental_forms(su, sv, suu, suv, svv) -> FundamentalForms:
    """Forms from precomputed partials; normal n = S_u x S_v normalized.

    Near-degenerate samples (EG - F^2 < 1e-12 (EG + 1)) get NaN second-form
    coefficients and NaN mean curvature instead of an extrapolated value.
    """
    e = (su * su).sum(axis=-1)
    f = (su * sv).sum(axis=-1)
    g = (sv * sv).sum(axis=-1)
    disc = e * g - f * f
    cross = np.cross(su, sv)
    norm = np.linalg.norm(cross, axis=-1)
    degenerate = disc < 1e-12 * (e * g + 1.0)

    with np.errstate(divide="ignore", invalid="ignore"):
        normal = cross / norm[..., None]
        l = (suu * normal).sum(axis=-1)
        m = (suv * normal).sum(axis=-1)
        n = (svv * normal).sum(axis=-1)
        h = (e * n - 2.0 * f * m + g * l) / (2.0 * disc)

    nanval = np.where(degenerate, np.nan, 1.0)
    return FundamentalForms(E=e, F=f, G=g, L=l * nanval, M=m * nanval, N=n * nanval, H=h * nanval)


def mean_curvature_grid(patch: Patch, samples: int):
    """Forms and mean curvature on a uniform samples x samples grid.

    Returns (us, vs, FundamentalForms) with array fields of shape
    (samples, samples).
    """
    if not isinstance(samples, (int, np.integer)) or samples < 2:
        raise ConfigurationError("mean-curvature grid needs at least 2 samples per direction")
    us = np.linspace(0.0, 1.0, samples)
    su, sv = partial_grids(patch, us, us)
    suu, suv, svv = second_partial_grids(patch, us, us)
    return us, us, fundamental_forms(su, sv, suu, suv, svv)


def triangulate_grid(grid: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Split a (U, V, 3) point grid into vertices and consistently wound triangles.

    Vertex order is u-major: index(iu, iv) = iu * V + iv. Each cell yields the
    two triangles (v00, v10, v11) and (v00, v11, v01).
    """
    nu, nv = grid.shape[0], grid.shape[1]
    vertices = grid.reshape(nu * nv, 3)
    iu, iv = np.meshgrid(np.arange(nu - 1), np.arange(nv - 1), indexing="ij")
    v00 = (iu * nv + iv).ravel()
    v10 = ((iu + 1) * nv + iv).ravel()
    v01 = (iu * nv + iv + 1).ravel()
    v11 = ((iu + 1) * nv + iv + 1).ravel()
    faces = np.concatenate(
        [np.stack([v00, v10, v11], axis=1), np.stack([v00, v11, v01], axis=1)], axis=0
    )
    return vertices, faces


def tessellate(patch: Patch, cells: int) -> tuple[np.ndarray, np.ndarray]:
    """Uniform tessellation: (cells+1)^2 vertices, 2*cells^2 triangles."""
    if not isinstance(cells, (int, np.integer)) or cells < 1:
        raise ConfigurationError("tessellation needs at least 1 cell per direction")
    params = np.linspace(0.0, 1.0, cells + 1)
    return triangulate_grid(evaluate_grid(patch, params, params))


def mesh_area(vertices: np.ndarray, faces: np.ndarray) -> float:
    """Total area of a triangle mesh (test oracle for area convergence)."""
    a = vertices[faces[:, 1]] - vertices[faces[:, 0]]
    b = vertices[faces[:, 2]] - vertices[faces[:, 0]]
    return float(0.5 * np.linalg.norm(np.cross(a, b), axis=-1).sum())
