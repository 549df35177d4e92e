"""Regularized geodesic distance fields on triangle meshes.

Distance-like functions are computed by maximizing their mass subject to
a unit bound on the per-face gradient norm, plus a weighted quadratic
smoothness energy (Dirichlet, vector-field alignment, bilaplacian, or an
externally supplied matrix). A fixed-source ADMM solver handles one
source set; a consensus ADMM produces the symmetric all-pairs matrix.
Analytical circle/disk solutions and an independent primal-dual solver
anchor correctness; audit utilities measure metric quality.
"""

from .all_pairs import AllPairsSettings, DistanceMatrix, consensus_update, solve_all_pairs
from .errors import MeshError, SolverError
from .fixed_source import (
    AdmmSettings,
    DistanceField,
    Factorization,
    prefactor_system,
    project_unit_ball,
    scale_alpha,
    solve_fixed_source,
)
from .isolines import Isoline, export_svg, extract_isolines
from .mesh import TriMesh, load_mesh, mesh_diameter, mesh_scale
from .meshgen import disk_mesh, jittered_mesh, rect_mesh
from .metrics import (
    AuditReport,
    fixed_pair_errors,
    gradient_norm_field,
    matrix_gradient_max,
    max_error_vs,
    symmetry_error,
    triangle_audit,
)
from .operators import DiffOps, build_ops
from .oracles import (
    circle_dirichlet_exact,
    circle_hessian_exact,
    circle_metric_check,
    disk_exact,
    reference_solve,
    ring_ops,
    solve_ring_1d,
)
from .regularizers import (
    LineField,
    RegularizerMatrix,
    bilaplacian_matrix,
    dirichlet_matrix,
    external_matrix,
    interpolate_line_field,
    localize_field,
    vfa_matrix,
)

__version__ = "0.1.0"

__all__ = [
    "AdmmSettings",
    "AllPairsSettings",
    "AuditReport",
    "DiffOps",
    "DistanceField",
    "DistanceMatrix",
    "Factorization",
    "Isoline",
    "LineField",
    "MeshError",
    "RegularizerMatrix",
    "SolverError",
    "TriMesh",
    "bilaplacian_matrix",
    "build_ops",
    "circle_dirichlet_exact",
    "circle_hessian_exact",
    "circle_metric_check",
    "consensus_update",
    "dirichlet_matrix",
    "disk_exact",
    "disk_mesh",
    "export_svg",
    "external_matrix",
    "extract_isolines",
    "fixed_pair_errors",
    "gradient_norm_field",
    "interpolate_line_field",
    "jittered_mesh",
    "load_mesh",
    "localize_field",
    "matrix_gradient_max",
    "max_error_vs",
    "mesh_diameter",
    "mesh_scale",
    "prefactor_system",
    "project_unit_ball",
    "rect_mesh",
    "reference_solve",
    "ring_ops",
    "scale_alpha",
    "solve_all_pairs",
    "solve_fixed_source",
    "solve_ring_1d",
    "symmetry_error",
    "triangle_audit",
    "vfa_matrix",
]
