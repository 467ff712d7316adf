"""Error measurement and the experiment studies built on the solver.

Errors against a fine-mesh reference are exact: the coarse solution is
re-expressed on the (nested) fine mesh and its distance measured through
the fine mass matrix, so no quadrature noise enters the convergence
rates.  Errors against smooth or piecewise-constant exact solutions use
per-element Gauss quadrature with optional element splitting.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .assembly import (
    Indicator,
    assemble_mass,
    basis_integrals,
    discrete_initial_data,
    drift_field,
    random_nodal_data,
)
from .config import RESONANCE_PRESET, mesh_with_free_count
from .fractional import mittag_leffler
from .meshes import BoundaryCondition, SpatialMesh, TimeGrid
from .stepper import evolve, run

_GAUSS_ERR = np.polynomial.legendre.leggauss(8)


@dataclass(frozen=True)
class ErrorSeries:
    """Per-step distances between two runs sharing one time grid."""

    times: np.ndarray
    errors: np.ndarray
    meta: dict = field(default_factory=dict)

    def __len__(self):
        return self.times.size


@dataclass(frozen=True)
class ConvergenceRow:
    alpha: float
    q_h: int
    e_star: float
    sigma: float | None


@dataclass(frozen=True)
class ConvergenceTable:
    rows: list
    series: dict

    def row(self, alpha, q_h):
        for r in self.rows:
            if r.alpha == alpha and r.q_h == q_h:
                return r
        raise KeyError((alpha, q_h))

    def __str__(self):
        lines = ["alpha    q_h      E*         sigma"]
        for r in self.rows:
            sig = "" if r.sigma is None else f"{r.sigma:8.3f}"
            lines.append(f"{r.alpha:<8g} {r.q_h:<8d} {r.e_star:.3e}  {sig}")
        return "\n".join(lines)


def l2_norm(mesh, coeffs):
    """Exact L2 norm of the piecewise-linear function with these coefficients."""
    m = assemble_mass(mesh)
    coeffs = np.asarray(coeffs, dtype=float)
    return float(np.sqrt(coeffs @ m.matvec(coeffs)))


def _nested_ratio(coarse_mesh, fine_mesh):
    nc, nf = coarse_mesh.n_elements, fine_mesh.n_elements
    if nf % nc:
        raise ValueError(f"{nf} fine elements not a multiple of {nc} coarse")
    r = nf // nc
    span = coarse_mesh.b - coarse_mesh.a
    if np.max(np.abs(fine_mesh.nodes[::r] - coarse_mesh.nodes)) > 1e-12 * span:
        raise ValueError("meshes are not nested")
    if coarse_mesh.bc is not fine_mesh.bc:
        raise ValueError("meshes impose different boundary conditions")
    return r


def represent_on_fine(coarse_mesh, coeffs, fine_mesh):
    """Re-express coarse piecewise-linear functions on a nested fine mesh.

    ``coeffs`` may be a single coefficient vector or a stack of them; the
    result holds full nodal values on the fine mesh, exactly equal to the
    coarse function.
    """
    r = _nested_ratio(coarse_mesh, fine_mesh)
    full = coarse_mesh.full_values(np.asarray(coeffs, dtype=float))
    single = full.ndim == 1
    if single:
        full = full[None, :]
    frac = np.arange(r, dtype=float) / r
    seg = full[:, :-1, None] * (1.0 - frac) + full[:, 1:, None] * frac
    rep = np.concatenate([seg.reshape(full.shape[0], -1), full[:, -1:]], axis=1)
    return rep[0] if single else rep


def _full_quadratic_form(mesh, values):
    """values @ M values with the unrestricted (all-node) mass matrix, rowwise."""
    m = assemble_mass(SpatialMesh(mesh.nodes, BoundaryCondition.ZERO_FLUX))
    mv = m.diag * values
    mv[..., :-1] += m.sup * values[..., 1:]
    mv[..., 1:] += m.sub * values[..., :-1]
    return np.einsum("...i,...i->...", values, mv)


def l2_error_nested(coarse_coeffs, coarse_mesh, fine_coeffs, fine_mesh):
    """Exact L2 distance between functions on nested meshes."""
    rep = represent_on_fine(coarse_mesh, coarse_coeffs, fine_mesh)
    diff = rep - fine_mesh.full_values(np.asarray(fine_coeffs, dtype=float))
    return float(np.sqrt(_full_quadratic_form(fine_mesh, diff)))


def error_series(coarse_history, fine_history, meta=None):
    """L2 distances ||U^n_coarse - U^n_fine|| for every shared time level."""
    if not np.array_equal(coarse_history.grid.levels, fine_history.grid.levels):
        raise ValueError("runs do not share a time grid")
    rep = represent_on_fine(
        coarse_history.mesh, coarse_history.coefficients, fine_history.mesh
    )
    diff = rep - fine_history.mesh.full_values(fine_history.coefficients)
    errs = np.sqrt(_full_quadratic_form(fine_history.mesh, diff))
    info = {
        "q_coarse": coarse_history.mesh.n_free,
        "q_fine": fine_history.mesh.n_free,
        "n_steps": coarse_history.grid.n_steps,
    }
    if meta:
        info.update(meta)
    return ErrorSeries(coarse_history.grid.levels.copy(), errs, info)


def weighted_error(series, alpha):
    """max_n of t_n**(3 alpha/4) E_n / sqrt(log(e^2 + 1/t_n)).

    The weight vanishes at t = 0, so the n = 0 entry never contributes.
    """
    t = series.times
    e = series.errors
    pos = t > 0
    if not pos.any():
        return 0.0
    t = t[pos]
    w = t ** (0.75 * alpha) / np.sqrt(np.log(math.e**2 + 1.0 / t))
    return float(np.max(w * e[pos]))


def convergence_rate(e_coarse, e_fine):
    """Observed order log2(E_coarse / E_fine) under one mesh halving."""
    if not (e_coarse > 0 and e_fine > 0):
        raise ValueError("errors must be positive to estimate a rate")
    return math.log2(e_coarse / e_fine)


def error_decay_slope(series, t_window):
    """Least-squares slope of log E against log t inside ``t_window``."""
    lo, hi = t_window
    if not 0 < lo < hi:
        raise ValueError(f"bad time window [{lo}, {hi}]")
    mask = (series.times >= lo) & (series.times <= hi) & (series.errors > 0)
    if mask.sum() < 10:
        raise ValueError(
            f"only {int(mask.sum())} usable samples in [{lo}, {hi}]; need >= 10"
        )
    slope = np.polyfit(np.log(series.times[mask]), np.log(series.errors[mask]), 1)[0]
    return float(slope)


def run_convergence_study(
    alphas,
    q_levels,
    q_ref,
    n_steps,
    init_method="l2",
    *,
    t_final=1.0,
    domain=(0.0, math.pi),
    drift="linear-sin",
    kappa=1.0,
    bc=BoundaryCondition.DIRICHLET,
    indicator=None,
    ref_init="l2",
    log=None,
):
    """Weighted errors and observed orders against a fine-mesh reference.

    For every alpha one reference run (q_ref dofs) and one run per entry
    of ``q_levels`` are performed on the graded grid with exponent
    1/alpha; all runs of one alpha share that grid.  ``init_method``
    selects the discrete initial data of the coarse runs; the reference
    stands in for the exact solution and therefore keeps the projection
    data regardless (override with ``ref_init``).  ``indicator`` gives
    the jump locations of the initial density (default: the quarter
    points of the domain).
    """
    drift = drift_field(drift)
    a, b = domain
    if indicator is None:
        indicator = (a + (b - a) / 4.0, a + 3.0 * (b - a) / 4.0)
    data = Indicator(*indicator)
    rows, series = [], {}
    for alpha in alphas:
        grid = TimeGrid.graded(n_steps, t_final, 1.0 / alpha)
        ref_mesh = mesh_with_free_count(domain, q_ref, bc)
        ref_u0 = discrete_initial_data(ref_mesh, data, ref_init)
        if log:
            log(f"alpha={alpha}: reference run with {q_ref} dofs")
        ref_hist, _ = evolve(ref_mesh, grid, alpha, kappa, drift, ref_u0)
        prev = None
        for q_h in q_levels:
            mesh = mesh_with_free_count(domain, q_h, bc)
            u0 = discrete_initial_data(mesh, data, init_method)
            if log:
                log(f"alpha={alpha}: run with {q_h} dofs")
            hist, _ = evolve(mesh, grid, alpha, kappa, drift, u0)
            es = error_series(hist, ref_hist, meta={"alpha": alpha})
            e_star = weighted_error(es, alpha)
            sigma = None if prev is None else convergence_rate(prev, e_star)
            rows.append(ConvergenceRow(alpha, q_h, e_star, sigma))
            series[(alpha, q_h)] = es
            prev = e_star
    return ConvergenceTable(rows, series)


def l2_error_vs_function(mesh, coeffs, func, breakpoints=()):
    """L2 distance between a mesh function and a reference function.

    Per-element 8-point Gauss quadrature; elements are split at the given
    breakpoints first, which makes the result exact for indicator-type
    references and quadrature-converged for smooth ones.
    """
    full = mesh.full_values(np.asarray(coeffs, dtype=float))
    nodes = mesh.nodes
    cuts = [c for c in sorted(breakpoints) if nodes[0] < c < nodes[-1]]
    g, w = _GAUSS_ERR
    total = 0.0
    for e in range(mesh.n_elements):
        xl, xr = nodes[e], nodes[e + 1]
        pieces = [xl] + [c for c in cuts if xl < c < xr] + [xr]
        for s0, s1 in zip(pieces[:-1], pieces[1:]):
            xg = s0 + (s1 - s0) * (g + 1.0) / 2.0
            lam = (xg - xl) / (xr - xl)
            uh = full[e] * (1.0 - lam) + full[e + 1] * lam
            d = uh - func(xg)
            total += (s1 - s0) / 2.0 * float(w @ (d * d))
    return math.sqrt(total)


def exact_subdiffusion_reference(alpha, mode_m, t, mesh):
    """Nodal values of the drift-free eigenmode solution at time t.

    On (0, pi) with Dirichlet ends, initial data sin(m x) evolves to
    E_alpha(-m^2 t^alpha) sin(m x); the returned vector samples this at
    the free nodes.
    """
    if mesh.bc is not BoundaryCondition.DIRICHLET:
        raise ValueError("eigenmode reference needs Dirichlet ends")
    if abs(mesh.a) > 1e-12 or abs(mesh.b - math.pi) > 1e-12:
        raise ValueError("eigenmode reference is defined on (0, pi)")
    mode_m = int(mode_m)
    if mode_m < 1:
        raise ValueError(f"mode index must be >= 1, got {mode_m}")
    if t < 0:
        raise ValueError(f"time must be nonnegative, got {t}")
    amp = mittag_leffler(alpha, -(mode_m**2) * t**alpha)
    return amp * np.sin(mode_m * mesh.free_nodes)


@dataclass(frozen=True)
class ResonanceResult:
    """Full trajectory of the double-well run plus its mass account."""

    x: np.ndarray
    times: np.ndarray
    surface: np.ndarray  # (n_levels, n_dofs) nodal values
    mass: np.ndarray
    config: object

    def surface_after(self, t_cut):
        """(x, times, values) with the early levels t < t_cut dropped."""
        keep = self.times >= t_cut
        return self.x, self.times[keep], self.surface[keep]


def run_resonance_demo(config=None):
    """Zero-flux double-well run from a point mass; tracks total mass."""
    config = RESONANCE_PRESET if config is None else config
    if config.bc != "zeroflux":
        raise ValueError("the resonance demo requires the zero-flux condition")
    if config.init != "delta":
        raise ValueError("the resonance demo starts from a point mass")
    history, reports = run(config)
    mesh = history.mesh
    hat_ints = basis_integrals(mesh)
    mass = history.coefficients @ hat_ints
    return ResonanceResult(
        x=mesh.free_nodes.copy(),
        times=history.grid.levels.copy(),
        surface=history.coefficients.copy(),
        mass=mass,
        config=config,
    )


@dataclass(frozen=True)
class StabilityResult:
    alpha: float
    max_ratio: float
    argmax_n: int


def run_stability_probe(
    alphas,
    seed,
    *,
    q_h=63,
    n_steps=2000,
    t_final=1.0,
    domain=(0.0, math.pi),
    drift="linear-sin",
    kappa=1.0,
    bc=BoundaryCondition.DIRICHLET,
    initial_coeffs=None,
):
    """sup_n ||U^n|| / ||U^0|| for random nodal initial data, per alpha.

    Norms are L2 norms of the mesh functions (through the mass matrix),
    not Euclidean coefficient norms.  ``initial_coeffs`` overrides the
    seeded random data; a zero start reports a ratio of 0 by convention.
    """
    results = {}
    mesh = mesh_with_free_count(domain, q_h, bc)
    mass = assemble_mass(mesh)
    u0 = random_nodal_data(mesh, seed) if initial_coeffs is None else initial_coeffs
    for alpha in alphas:
        grid = TimeGrid.graded(n_steps, t_final, 1.0 / alpha)
        history, _ = evolve(mesh, grid, alpha, kappa, drift, u0)
        coeffs = history.coefficients
        norms = np.sqrt(
            np.einsum("ij,ij->i", coeffs, _tridiag_rows(mass, coeffs))
        )
        if norms[0] == 0.0:
            results[alpha] = StabilityResult(alpha, 0.0, 0)
            continue
        ratios = norms / norms[0]
        k = int(np.argmax(ratios))
        results[alpha] = StabilityResult(alpha, float(ratios[k]), k)
    return results


def _tridiag_rows(m, stack):
    out = m.diag * stack
    out[..., :-1] += m.sup * stack[..., 1:]
    out[..., 1:] += m.sub * stack[..., :-1]
    return out
