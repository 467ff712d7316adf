"""Implicit time stepping with the fractional memory term.

At step n the scheme solves

    (M + w[n,n] G^n) U^n = M U^{n-1} - G^n sum_{j=1}^{n-1} c[n,j] U^j

where M is the mass matrix, G^n the diffusion-drift operator with the
force frozen at t_n, w the kernel weights and c[n,j] the weight
differences from :func:`fracfp.fractional.history_coefficients`.  The
memory term needs every past vector, so a run keeps the whole history in
memory; the weighted accumulation runs in increasing j with compensated
summation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .assembly import assemble_mass, assemble_operator, basis_integrals, drift_field
from .fractional import weight_row
from .linalg import SolverFailure, solve_tridiagonal, weighted_history_sum

__all__ = [
    "SolutionHistory",
    "StepReport",
    "SolverFailure",
    "solve_tridiagonal",
    "step",
    "evolve",
    "run",
]


class SolutionHistory:
    """Sequence U^0, U^1, ... of nodal coefficient vectors of one run."""

    def __init__(self, mesh, grid, u0):
        u0 = np.ascontiguousarray(u0, dtype=float)
        if u0.shape != (mesh.n_free,):
            raise ValueError(
                f"initial data has shape {u0.shape}, mesh has {mesh.n_free} dofs"
            )
        self.mesh = mesh
        self.grid = grid
        self._data = np.empty((grid.n_steps + 1, mesh.n_free))
        self._data[0] = u0
        self._count = 1

    def __len__(self):
        return self._count

    @property
    def n_completed(self):
        """Number of completed time steps."""
        return self._count - 1

    @property
    def coefficients(self):
        """(len, Q) view of the vectors stored so far."""
        return self._data[: self._count]

    def __getitem__(self, n):
        if not 0 <= n < self._count:
            raise IndexError(f"step {n} not stored (have 0..{self._count - 1})")
        return self._data[n]

    def append(self, vec):
        if self._count > self.grid.n_steps:
            raise ValueError("history already holds all time levels")
        self._data[self._count] = vec
        self._count += 1


@dataclass(frozen=True)
class StepReport:
    """Per-step diagnostics.

    ``residual_norm`` is the max-norm of (system matrix @ solution - rhs)
    recomputed after the solve; ``mass_total`` is the integral of the
    piecewise-linear solution over the domain.
    """

    n: int
    residual_norm: float
    pivot_growth: float
    mass_total: float


def _advance(history, mass, hat_ints, kappa, drift, n, row, prev_row):
    grid = history.grid
    if n != len(history):
        raise ValueError(
            f"step {n} needs exactly U^0..U^{n - 1} in the history "
            f"(holds {len(history)} vectors)"
        )
    operator = assemble_operator(history.mesh, kappa, drift, grid.levels[n])
    system = mass.add_scaled(operator, row[-1])
    rhs = mass.matvec(history[n - 1])
    if n >= 2:
        coeffs = row[: n - 1] - prev_row
        if coeffs.any():  # identically zero in the classical limit
            accum = weighted_history_sum(history.coefficients[1:n], coeffs)
            rhs -= operator.matvec(accum)
    try:
        u, growth = solve_tridiagonal(system, rhs)
    except SolverFailure as exc:
        exc.step = n
        raise
    residual = float(np.max(np.abs(system.matvec(u) - rhs)))
    history.append(u)
    return StepReport(
        n=n,
        residual_norm=residual,
        pivot_growth=growth,
        mass_total=float(hat_ints @ u),
    )


def step(history, alpha, kappa, drift, n):
    """Compute U^n, append it to the history and return a StepReport."""
    n = int(n)
    if not 1 <= n <= history.grid.n_steps:
        raise ValueError(f"step index {n} outside 1..{history.grid.n_steps}")
    drift = drift_field(drift)
    mass = assemble_mass(history.mesh)
    hat_ints = basis_integrals(history.mesh)
    row = weight_row(history.grid, alpha, n)
    prev_row = weight_row(history.grid, alpha, n - 1) if n >= 2 else None
    return _advance(history, mass, hat_ints, kappa, drift, n, row, prev_row)


def evolve(mesh, grid, alpha, kappa, drift, u0):
    """Run all time steps of the scheme from the given initial coefficients.

    Returns (history, reports); with a zero-step grid the history holds
    only U^0 and the report list is empty.
    """
    drift = drift_field(drift)
    history = SolutionHistory(mesh, grid, u0)
    mass = assemble_mass(mesh)
    hat_ints = basis_integrals(mesh)
    reports = []
    prev_row = None
    for n in range(1, grid.n_steps + 1):
        row = weight_row(grid, alpha, n)
        reports.append(
            _advance(history, mass, hat_ints, kappa, drift, n, row, prev_row)
        )
        prev_row = row
    return history, reports


def run(config):
    """Run a full experiment described by an ExperimentConfig."""
    config.validate()
    mesh = config.build_mesh()
    grid = config.build_grid()
    u0 = config.build_initial_data(mesh)
    return evolve(mesh, grid, config.alpha, config.kappa, config.drift, u0)
