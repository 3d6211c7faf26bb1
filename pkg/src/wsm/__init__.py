"""Finite-element solution of elastic dislocation problems with weakly
enforced slip: the approximation space and stiffness matrix are independent
of the fault, which enters through a load functional on a fault-mesh cover.
"""

from .elasticity import IsotropicElasticity, positivity_constants, strain, stress, traction
from .mesh import DIRICHLET, FREE_SURFACE, StructuredMesh, build_box_mesh, element_containing, mesh_size
from .femspace import FeSpace, build_space, gauss_rule, interpolate, shape_eval
from .linsys import (FeSystem, SolveReport, apply_dirichlet, assemble_stiffness,
                     build_preconditioner, build_system, cg_solve, solve_system)
from .fault import (FaultModel, FaultSegment, fault_quality_norm, segment_fault,
                    smooth_slip_2d, wsm_rhs)
from .errors import ErrorReport, RateFit, error_norms, fit_rate
from .harness import case_setup, reuse_demo, run_case

__all__ = [
    "IsotropicElasticity", "positivity_constants", "strain", "stress", "traction",
    "DIRICHLET", "FREE_SURFACE", "StructuredMesh", "build_box_mesh",
    "element_containing", "mesh_size",
    "FeSpace", "build_space", "gauss_rule", "interpolate", "shape_eval",
    "FeSystem", "SolveReport", "apply_dirichlet", "assemble_stiffness",
    "build_preconditioner", "build_system", "cg_solve", "solve_system",
    "FaultModel", "FaultSegment", "fault_quality_norm", "segment_fault",
    "smooth_slip_2d", "wsm_rhs",
    "ErrorReport", "RateFit", "error_norms", "fit_rate",
    "case_setup", "reuse_demo", "run_case",
]
