"""Finite element solver for a time-fractional Fokker-Planck equation on
an interval: hat-function elements in space, implicit Euler with memory
weights on (optionally graded) time grids, plus the study harness that
measures convergence rates, error decay and mass conservation.
"""

__version__ = "0.1.0"

from .analysis import (
    ConvergenceTable,
    ErrorSeries,
    convergence_rate,
    error_decay_slope,
    error_series,
    exact_subdiffusion_reference,
    l2_error_nested,
    l2_error_vs_function,
    l2_norm,
    run_convergence_study,
    run_resonance_demo,
    run_stability_probe,
    weighted_error,
)
from .assembly import (
    DriftField,
    Indicator,
    PointMass,
    RandomNodal,
    TriDiagMatrix,
    assemble_mass,
    assemble_operator,
    assemble_stiffness,
    basis_integrals,
    discrete_initial_data,
    drift_field,
    l2_projection,
    nodal_interpolant,
    point_mass_vector,
    random_nodal_data,
)
from .config import ExperimentConfig, mesh_with_free_count
from .fractional import (
    AccuracyError,
    fractional_integral_of_power,
    history_coefficients,
    mittag_leffler,
    weight_row,
)
from .linalg import SolverFailure, solve_tridiagonal, weighted_history_sum
from .meshes import BoundaryCondition, SpatialMesh, TimeGrid
from .stepper import SolutionHistory, StepReport, evolve, run, step
