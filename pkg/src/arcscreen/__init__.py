"""Galerkin solver for the bulk-surface coupled Laplace problem on an open arc."""

from arcscreen.geometry import (
    ArcParameterization,
    GeometryError,
    arc_chord_constant,
    make_segment,
    make_semicircle,
)
from arcscreen.spaces import (
    EnrichedSpace,
    Partition,
    build_uniform_partition,
    cutoff_eta,
    cutoff_phi,
    prolong,
)
from arcscreen.quadrature import (
    QuadratureError,
    QuadratureRule,
    adaptive_integrate,
    galerkin_log_pair,
    galerkin_smooth_pair,
    gauss_jacobi,
    gauss_legendre,
    log_rule,
)
from arcscreen.assembly import BlockSystem, ProblemSpec, assemble_system, bilinear_apply
from arcscreen.solver import Solution, condition_estimate, solve
from arcscreen.diagnostics import (
    ConvergenceRecord,
    chebyshev_oracle_check,
    compatibility_residual,
    convergence_table,
    energy_norm_diff,
    fit_edge_exponent,
    fourier_multiplier_check,
)
from arcscreen.potential import eval_potential, field_grid, jump_check

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
