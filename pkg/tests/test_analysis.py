import math

import numpy as np
import pytest

from fracfp.analysis import (
    ErrorSeries,
    convergence_rate,
    error_decay_slope,
    error_series,
    exact_subdiffusion_reference,
    l2_error_nested,
    l2_error_vs_function,
    l2_norm,
    represent_on_fine,
    run_convergence_study,
    run_resonance_demo,
    run_stability_probe,
    weighted_error,
)
from fracfp.assembly import Indicator, l2_projection, random_nodal_data
from fracfp.config import RESONANCE_PRESET, mesh_with_free_count
from fracfp.fractional import mittag_leffler
from fracfp.meshes import BoundaryCondition, SpatialMesh, TimeGrid
from fracfp.stepper import evolve

from oracles import l2_distance_quad

D = BoundaryCondition.DIRICHLET
Z = BoundaryCondition.ZERO_FLUX
PI = math.pi


def test_nested_error_zero_for_identical_functions():
    coarse = SpatialMesh.uniform(0.0, 1.0, 3, D)
    fine = SpatialMesh.uniform(0.0, 1.0, 15, D)
    c = np.array([1.0, -2.0, 0.5])
    rep = represent_on_fine(coarse, c, fine)[fine.free_slice]
    assert l2_error_nested(c, coarse, rep, fine) == 0.0


def test_nested_error_single_fine_hat():
    coarse = SpatialMesh.uniform(0.0, 1.0, 3, D)
    fine = SpatialMesh.uniform(0.0, 1.0, 7, D)
    h_f = 1.0 / 8.0
    hat = np.zeros(7)
    hat[3] = 1.0
    err = l2_error_nested(np.zeros(3), coarse, hat, fine)
    assert err == pytest.approx(math.sqrt(2 * h_f / 3), rel=1e-14)


def test_nested_error_matches_quadrature_oracle():
    rng = np.random.default_rng(6)
    for bc, q_c, q_f in ((D, 7, 63), (Z, 9, 65)):
        coarse = mesh_with_free_count((0.0, PI), q_c, bc)
        fine = mesh_with_free_count((0.0, PI), q_f, bc)
        for _ in range(5):
            cc = rng.standard_normal(coarse.n_free)
            cf = rng.standard_normal(fine.n_free)
            mine = l2_error_nested(cc, coarse, cf, fine)
            ref = l2_distance_quad(
                coarse.nodes,
                coarse.full_values(cc),
                fine.nodes,
                fine.full_values(cf),
            )
            assert mine == pytest.approx(ref, rel=1e-12)


def test_nested_error_rejects_non_nested():
    a = SpatialMesh.uniform(0.0, 1.0, 5, D)
    b = SpatialMesh.uniform(0.0, 1.0, 7, D)
    with pytest.raises(ValueError):
        l2_error_nested(np.zeros(5), a, np.zeros(7), b)
    c = SpatialMesh.uniform(0.0, 1.1, 11, D)
    with pytest.raises(ValueError):
        l2_error_nested(np.zeros(5), a, np.zeros(11), c)
    d = SpatialMesh.uniform(0.0, 1.0, 11, D)
    e = SpatialMesh.uniform(0.0, 1.0, 3, Z)
    with pytest.raises(ValueError):
        l2_error_nested(np.zeros(5), e, np.zeros(11), d)


def test_represent_on_fine_is_exact_interpolation():
    coarse = SpatialMesh.uniform(-2.0, 2.0, 7, Z)
    fine = SpatialMesh.uniform(-2.0, 2.0, 63, Z)
    rng = np.random.default_rng(12)
    c = rng.standard_normal(coarse.n_free)
    rep = represent_on_fine(coarse, c, fine)
    direct = np.interp(fine.nodes, coarse.nodes, coarse.full_values(c))
    assert rep == pytest.approx(direct, rel=1e-14, abs=1e-15)


def test_weighted_error_basics():
    t = np.array([0.0, 0.1, 0.5, 1.0])
    zero = ErrorSeries(t, np.zeros(4))
    assert weighted_error(zero, 0.5) == 0.0
    series = ErrorSeries(t, np.array([99.0, 2.0, 1.0, 0.5]))
    val = weighted_error(series, 0.5)
    w = t[1:] ** 0.375 / np.sqrt(np.log(math.e**2 + 1 / t[1:]))
    assert val == pytest.approx(np.max(w * [2.0, 1.0, 0.5]), rel=1e-15)
    # the t = 0 entry never contributes, however large
    series2 = ErrorSeries(t[1:], np.array([2.0, 1.0, 0.5]))
    assert weighted_error(series2, 0.5) == pytest.approx(val, rel=1e-15)


def test_weighted_error_homogeneous():
    t = np.linspace(0, 1, 33)
    e = np.exp(-t) * (1 + t)
    series = ErrorSeries(t, e)
    scaled = ErrorSeries(t, 7.0 * e)
    assert weighted_error(scaled, 0.75) == pytest.approx(
        7.0 * weighted_error(series, 0.75), rel=1e-14
    )


def test_convergence_rate():
    assert convergence_rate(4.0, 1.0) == pytest.approx(2.0, abs=1e-15)
    assert convergence_rate(5e-3, 5e-3) == 0.0
    assert convergence_rate(7.98e-3, 1.96e-3) == pytest.approx(
        math.log2(7.98 / 1.96), rel=1e-15
    )
    with pytest.raises(ValueError):
        convergence_rate(0.0, 1.0)
    with pytest.raises(ValueError):
        convergence_rate(1.0, -2.0)


def test_error_decay_slope_exact_power_law():
    t = np.logspace(-4, 0, 200)
    series = ErrorSeries(t, t**-0.5625)
    slope = error_decay_slope(series, (1e-3, 1e-1))
    assert slope == pytest.approx(-0.5625, abs=1e-10)
    flat = ErrorSeries(t, np.full(200, 3.3))
    assert error_decay_slope(flat, (1e-3, 1e-1)) == pytest.approx(0.0, abs=1e-12)


def test_error_decay_slope_validation():
    t = np.logspace(-4, 0, 12)
    series = ErrorSeries(t, t)
    with pytest.raises(ValueError):
        error_decay_slope(series, (0.9, 1.0))  # too few samples
    with pytest.raises(ValueError):
        error_decay_slope(series, (0.5, 0.1))


def test_error_series_requires_shared_grid():
    mesh_c = mesh_with_free_count((0.0, PI), 7, D)
    mesh_f = mesh_with_free_count((0.0, PI), 15, D)
    u0_c = l2_projection(mesh_c, Indicator(PI / 4, 3 * PI / 4))
    u0_f = l2_projection(mesh_f, Indicator(PI / 4, 3 * PI / 4))
    hist_c, _ = evolve(mesh_c, TimeGrid.graded(4, 1.0, 2.0), 0.5, 1.0, "zero", u0_c)
    hist_f, _ = evolve(mesh_f, TimeGrid.graded(5, 1.0, 2.0), 0.5, 1.0, "zero", u0_f)
    with pytest.raises(ValueError):
        error_series(hist_c, hist_f)


def test_exact_subdiffusion_reference_values():
    mesh = mesh_with_free_count((0.0, PI), 15, D)
    x = mesh.free_nodes
    assert exact_subdiffusion_reference(0.5, 1, 0.0, mesh) == pytest.approx(np.sin(x))
    assert exact_subdiffusion_reference(1.0, 1, 1.0, mesh) == pytest.approx(
        math.exp(-1.0) * np.sin(x), rel=1e-14
    )
    assert exact_subdiffusion_reference(0.5, 1, 1.0, mesh) == pytest.approx(
        0.42758357615580705 * np.sin(x), rel=1e-12
    )
    assert exact_subdiffusion_reference(0.5, 2, 1.0, mesh) == pytest.approx(
        mittag_leffler(0.5, -4.0) * np.sin(2 * x), rel=1e-12
    )


def test_exact_subdiffusion_reference_validation():
    with pytest.raises(ValueError):
        exact_subdiffusion_reference(0.5, 1, 1.0, mesh_with_free_count((0.0, PI), 9, Z))
    with pytest.raises(ValueError):
        exact_subdiffusion_reference(0.5, 1, 1.0, mesh_with_free_count((0.0, 1.0), 9, D))
    mesh = mesh_with_free_count((0.0, PI), 9, D)
    with pytest.raises(ValueError):
        exact_subdiffusion_reference(0.5, 0, 1.0, mesh)
    with pytest.raises(ValueError):
        exact_subdiffusion_reference(0.5, 1, -1.0, mesh)


def test_eigenmode_factor_where_time_error_subdominant():
    # invariant: error against the eigenmode solution drops by ~4 per
    # halving as long as the shared-grid time error stays subdominant
    alpha = 0.75
    amp = mittag_leffler(alpha, -1.0)
    errs = []
    for q in (7, 15, 31):
        mesh = mesh_with_free_count((0.0, PI), q, D)
        grid = TimeGrid.graded(4000, 1.0, 1.0 / alpha)
        u0 = l2_projection(mesh, np.sin)
        hist, _ = evolve(mesh, grid, alpha, 1.0, "zero", u0)
        errs.append(l2_error_vs_function(mesh, hist[4000], lambda x: amp * np.sin(x)))
    for e0, e1 in zip(errs[:-1], errs[1:]):
        assert 3.5 < e0 / e1 < 4.5


def test_l2_error_vs_function_with_breakpoints():
    mesh = SpatialMesh.uniform(0.0, PI, 15, D)
    coeffs = np.zeros(15)

    def u0(x):
        return ((x >= PI / 4) & (x <= 3 * PI / 4)).astype(float)

    err = l2_error_vs_function(mesh, coeffs, u0, breakpoints=(PI / 4, 3 * PI / 4))
    assert err == pytest.approx(math.sqrt(PI / 2), rel=1e-13)  # measure of the plateau


def test_mini_convergence_study_structure():
    table = run_convergence_study([0.5], [7, 15], 31, 40, "l2")
    assert len(table.rows) == 2
    first, second = table.rows
    assert first.sigma is None
    assert second.sigma == pytest.approx(
        math.log2(first.e_star / second.e_star), rel=1e-12
    )
    series = table.series[(0.5, 7)]
    assert len(series) == 41
    assert series.errors[0] > 0  # projections differ between the meshes
    with pytest.raises(KeyError):
        table.row(0.5, 99)


def test_convergence_study_rejects_non_nested_levels():
    with pytest.raises(ValueError):
        run_convergence_study([0.5], [6], 31, 10, "l2")


def test_stability_probe_classical_contraction():
    results = run_stability_probe([1.0], seed=7, q_h=31, n_steps=64, drift="zero")
    assert results[1.0].max_ratio <= 1.0 + 1e-12
    assert results[1.0].argmax_n == 0


def test_stability_probe_fractional_bounded():
    results = run_stability_probe([0.5, 0.9], seed=7, q_h=31, n_steps=128)
    for alpha, res in results.items():
        assert res.alpha == alpha
        assert 0.9 <= res.max_ratio <= 10.0


def test_stability_probe_zero_data_convention():
    results = run_stability_probe([0.5], seed=7, q_h=15, n_steps=8, initial_coeffs=np.zeros(15))
    assert results[0.5].max_ratio == 0.0


def test_stability_probe_seed_dependence():
    # different seeds probe different data; the norm trajectories differ
    # while the sup ratio stays bounded (empirically it is 1.0 at n = 0,
    # since the dynamics contract the random data from the start)
    mesh = mesh_with_free_count((0.0, PI), 15, D)
    grid = TimeGrid.graded(64, 1.0, 2.0)
    finals = []
    for seed in (1, 2):
        hist, _ = evolve(mesh, grid, 0.9, 1.0, "linear-sin", random_nodal_data(mesh, seed))
        finals.append(l2_norm(mesh, hist[64]))
        res = run_stability_probe([0.9], seed=seed, q_h=15, n_steps=64)[0.9]
        assert res.max_ratio <= 10.0
    assert finals[0] != finals[1]


def test_resonance_demo_shapes_and_cut():
    config = RESONANCE_PRESET.with_overrides(n_steps=256)
    res = run_resonance_demo(config)
    assert res.surface.shape == (257, 65)
    assert res.mass.shape == (257,)
    assert res.mass == pytest.approx(np.ones(257), abs=1e-10)
    x, t, surf = res.surface_after(0.005)
    assert t.size < res.times.size
    assert np.all(t >= 0.005)
    assert surf.shape == (t.size, 65)
    # spurious oscillations right after the point-mass start
    assert res.surface[1:8].min() < 0
    assert res.surface[0][32] > 0  # the source node itself


def test_resonance_demo_validation():
    with pytest.raises(ValueError):
        run_resonance_demo(RESONANCE_PRESET.with_overrides(bc="dirichlet", q_h=63))
    with pytest.raises(ValueError):
        run_resonance_demo(RESONANCE_PRESET.with_overrides(init="l2"))


def test_l2_norm_matches_dense_quadratic_form():
    mesh = mesh_with_free_count((0.0, PI), 15, D)
    rng = np.random.default_rng(10)
    c = rng.standard_normal(15)
    from fracfp.assembly import assemble_mass

    dense = assemble_mass(mesh).to_dense()
    assert l2_norm(mesh, c) == pytest.approx(math.sqrt(c @ dense @ c), rel=1e-14)
