"""Dirichlet-extremal tensor-product patches with tunable trigonometric bases.

The library solves a discrete least-area problem: given the boundary rows and
columns of a control net, fill the interior so the patch extremizes the
Dirichlet energy, optionally optimizing the basis shape parameters by a
particle swarm. Harmonic reconstruction of partially known nets and a blended
Coons-style construction with Bernstein boundaries round out the toolkit.
"""

from .basis import BasisSpec, ShapePair, basis_tables, eval_bernstein, eval_gt
from .coons import (
    BoundaryCurves,
    CurveSpec,
    coons_classical,
    coons_classical_matrix,
    optimize_tb,
    solve_tb_interior,
    tb_components,
    tb_coons,
    tb_dirichlet_energy,
    tb_surface_jet,
)
from .dirichlet import (
    assemble_coefficients,
    assemble_system,
    assemble_system_generic,
    reduced_functional,
    solve_interior,
)
from .errors import (
    ConfigurationError,
    DomainError,
    GtPlateauError,
    NetFormatError,
    ReconstructionError,
    SolverError,
)
from .harmonic import (
    defect_objective,
    elevation_coefficients,
    harmonic_reconstruct,
    laplacian_coefficient_operator,
)
from .io import load_net, save_net
from .numerics import QuadratureRule, RngStream, gauss_legendre_rule
from .patch import (
    ControlNet,
    Patch,
    SurfaceShape,
    area,
    dirichlet_energy,
    evaluate,
    laplacian_defect,
    mean_curvature_grid,
    partials,
    tessellate,
)
from .pso import PsoConfig, PsoResult, optimize

__version__ = "0.1.0"

__all__ = [
    "BasisSpec",
    "BoundaryCurves",
    "ConfigurationError",
    "ControlNet",
    "CurveSpec",
    "DomainError",
    "GtPlateauError",
    "NetFormatError",
    "Patch",
    "PsoConfig",
    "PsoResult",
    "QuadratureRule",
    "ReconstructionError",
    "RngStream",
    "ShapePair",
    "SolverError",
    "SurfaceShape",
    "area",
    "assemble_coefficients",
    "assemble_system",
    "assemble_system_generic",
    "basis_tables",
    "coons_classical",
    "coons_classical_matrix",
    "defect_objective",
    "dirichlet_energy",
    "elevation_coefficients",
    "eval_bernstein",
    "eval_gt",
    "evaluate",
    "gauss_legendre_rule",
    "harmonic_reconstruct",
    "laplacian_coefficient_operator",
    "laplacian_defect",
    "load_net",
    "mean_curvature_grid",
    "optimize",
    "optimize_tb",
    "partials",
    "reduced_functional",
    "save_net",
    "solve_interior",
    "solve_tb_interior",
    "tb_components",
    "tb_coons",
    "tb_dirichlet_energy",
    "tb_surface_jet",
    "tessellate",
]
