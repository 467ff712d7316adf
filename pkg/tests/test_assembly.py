import math

import numpy as np
import pytest

from fracfp.assembly import (
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
    hat_load_indicator,
    l2_projection,
    nodal_interpolant,
    point_mass_vector,
    random_nodal_data,
)
from fracfp.meshes import BoundaryCondition, SpatialMesh

import sympy as sp
from oracles import DRIFT_EXPRS, dense_operator, local_drift_integrals

D = BoundaryCondition.DIRICHLET
Z = BoundaryCondition.ZERO_FLUX


def _random_mesh(rng, bc, n_max=12):
    interior = np.sort(rng.uniform(0.05, 0.95, size=rng.integers(2, n_max)))
    nodes = np.concatenate([[0.0], np.unique(interior), [1.0]])
    return SpatialMesh(nodes, bc)


def test_mass_interior_row():
    h = 0.25
    mesh = SpatialMesh.uniform(0.0, 1.0, 3, D)
    m = assemble_mass(mesh)
    assert m.symmetric
    assert m.diag == pytest.approx([2 * h / 3] * 3, rel=1e-15)
    assert m.sub == pytest.approx([h / 6] * 2, rel=1e-15)
    assert np.array_equal(m.sub, m.sup)


def test_mass_zero_flux_endpoint_row():
    h = 0.25
    mesh = SpatialMesh.uniform(0.0, 1.0, 3, Z)
    m = assemble_mass(mesh)
    assert m.diag[0] == pytest.approx(h / 3, rel=1e-15)
    assert m.sup[0] == pytest.approx(h / 6, rel=1e-15)


def test_mass_row_sums_are_hat_integrals():
    rng = np.random.default_rng(1)
    # identity holds wherever the summed hats form a partition of unity,
    # i.e. everywhere for zero-flux, away from the boundary for Dirichlet
    mesh = _random_mesh(rng, Z)
    sums = assemble_mass(mesh).matvec(np.ones(mesh.n_free))
    assert sums == pytest.approx(basis_integrals(mesh), rel=1e-14)
    mesh = _random_mesh(rng, D)
    sums = assemble_mass(mesh).matvec(np.ones(mesh.n_free))
    assert sums[1:-1] == pytest.approx(basis_integrals(mesh)[1:-1], rel=1e-14)


def test_mass_is_spd():
    rng = np.random.default_rng(2)
    for bc in (D, Z):
        mesh = _random_mesh(rng, bc)
        dense = assemble_mass(mesh).to_dense()
        np.linalg.cholesky(dense)  # raises if not positive definite
        assert np.min(np.linalg.eigvalsh(dense)) > mesh.element_sizes.min() / 6.1


def test_stiffness_interior_row():
    h = math.pi / 4
    mesh = SpatialMesh.uniform(0.0, math.pi, 3, D)
    g = assemble_operator(mesh, 1.0, "zero", 0.0)
    assert g.diag == pytest.approx([2 / h] * 3, rel=1e-14)
    assert g.sub == pytest.approx([-1 / h] * 2, rel=1e-14)
    assert g.sup == pytest.approx([-1 / h] * 2, rel=1e-14)


def test_stiffness_definiteness():
    rng = np.random.default_rng(3)
    stiff_d = assemble_stiffness(_random_mesh(rng, D)).to_dense()
    assert np.min(np.linalg.eigvalsh(stiff_d)) > 0
    stiff_z = assemble_stiffness(_random_mesh(rng, Z)).to_dense()
    eigs = np.linalg.eigvalsh(stiff_z)
    assert eigs[0] == pytest.approx(0.0, abs=1e-12)  # constants in the kernel
    assert eigs[1] > 0


def test_constant_drift_contribution():
    mesh = SpatialMesh.uniform(0.0, 1.0, 4, D)
    g0 = assemble_operator(mesh, 1.0, "zero", 0.0)
    gc = assemble_operator(mesh, 1.0, "constant:2.5", 0.0)
    assert gc.diag == pytest.approx(g0.diag, rel=1e-14)
    assert gc.sup - g0.sup == pytest.approx([2.5 / 2] * 3, rel=1e-14)
    assert gc.sub - g0.sub == pytest.approx([-2.5 / 2] * 3, rel=1e-14)


@pytest.mark.parametrize("label", ["linear-sin", "double-well"])
@pytest.mark.parametrize("bc", [D, Z])
def test_operator_matches_symbolic_assembly(label, bc):
    rng = np.random.default_rng(4)
    table = local_drift_integrals(DRIFT_EXPRS[label])
    for mesh in (SpatialMesh.uniform(-1.0, 2.0, 6, bc), _random_mesh(rng, bc)):
        for t in (0.0, 0.37, 1.9):
            mine = assemble_operator(mesh, 1.3, label, t).to_dense()
            ref = dense_operator(mesh.nodes, bc is D, 1.3, table, t)
            assert mine == pytest.approx(ref, rel=1e-13, abs=1e-14)


def test_quadrature_exact_for_degree_five_drift():
    # 4-point Gauss integrates the degree-7 products exactly
    x = sp.Symbol("x")
    expr = x**5 - 2 * x**2 + 1
    table = local_drift_integrals(expr)
    mesh = SpatialMesh.uniform(0.0, 1.5, 5, D)
    poly = sp.lambdify(x, expr, "numpy")
    mine = assemble_operator(mesh, 1.0, drift_field_from(poly), 0.0).to_dense()
    ref = dense_operator(mesh.nodes, True, 1.0, table, 0.0)
    assert mine == pytest.approx(ref, rel=1e-13)


def drift_field_from(func):
    from fracfp.assembly import DriftField

    return DriftField(lambda xx, tt: func(xx), "poly")


def test_drift_labels():
    assert drift_field("zero")(np.array([1.0]), 3.0) == 0.0
    assert drift_field("constant:-3")(np.array([9.0]), 0.0) == -3.0
    f = drift_field("linear-sin")
    assert f(np.array([2.0]), 0.5) == pytest.approx(-2.0 + math.sin(0.5))
    g = drift_field("double-well")
    assert g(np.array([2.0]), 0.5) == pytest.approx(-8.0 + 2.0 + math.cos(0.5))
    with pytest.raises(ValueError):
        drift_field("lorentz")


def test_projection_of_constant_is_constant():
    mesh = SpatialMesh.uniform(-1.0, 1.0, 7, Z)
    coeffs = l2_projection(mesh, lambda x: np.ones_like(x))
    assert coeffs == pytest.approx(np.ones(9), rel=1e-13)


def test_projection_reproduces_trial_functions():
    mesh = SpatialMesh.uniform(0.0, 1.0, 9, D)
    m = 4
    hat = np.zeros(9)
    hat[m] = 1.0

    def u0(x):
        return np.interp(x, mesh.nodes, mesh.full_values(hat))

    coeffs = l2_projection(mesh, u0)
    assert coeffs == pytest.approx(hat, abs=1e-12)


def test_projection_orthogonality_residual():
    mesh = SpatialMesh.uniform(0.0, math.pi, 15, D)
    data = Indicator(math.pi / 4, 3 * math.pi / 4)
    coeffs = l2_projection(mesh, data)
    defect = hat_load_indicator(mesh, data.lo, data.hi) - assemble_mass(mesh).matvec(coeffs)
    assert np.max(np.abs(defect)) < 1e-12


def test_projection_overshoots_near_jumps():
    mesh = SpatialMesh.uniform(0.0, math.pi, 15, D)
    coeffs = l2_projection(mesh, Indicator(math.pi / 4, 3 * math.pi / 4))
    assert coeffs.max() > 1.0 + 1e-3  # Gibbs-like overshoot inside the plateau
    assert coeffs.min() < -1e-3  # and undershoot outside it


def test_indicator_loads_with_off_node_jumps():
    mesh = SpatialMesh.uniform(0.0, 1.0, 3, Z)
    lo, hi = 0.1, 0.6  # both interior to elements
    loads = hat_load_indicator(mesh, lo, hi)
    assert loads.sum() == pytest.approx(hi - lo, rel=1e-14)
    xs = np.linspace(0, 1, 2001)

    def hat(p):
        v = np.zeros(mesh.n_nodes)
        v[p] = 1.0
        return np.interp(xs, mesh.nodes, v)

    inside = (xs >= lo) & (xs <= hi)
    for p in range(5):
        ref = np.trapezoid(hat(p) * inside, xs)
        assert loads[p] == pytest.approx(ref, abs=2e-4)


def test_nodal_interpolant_closed_interval_convention():
    mesh = SpatialMesh.uniform(0.0, math.pi, 15, D)
    vals = nodal_interpolant(mesh, Indicator(math.pi / 4, 3 * math.pi / 4))
    x = mesh.free_nodes
    assert np.array_equal(vals, ((x >= math.pi / 4) & (x <= 3 * math.pi / 4)).astype(float))
    assert vals[3] == 1.0  # node exactly at the lower jump
    assert vals[11] == 1.0  # node exactly at the upper jump


def test_interpolation_error_closed_form():
    # one linear ramp per jump element; each contributes h/3 to the square
    from scipy.integrate import quad

    for q in (7, 15, 31):
        mesh = SpatialMesh.uniform(0.0, math.pi, q, D)
        h = math.pi / (q + 1)
        data = Indicator(math.pi / 4, 3 * math.pi / 4)
        full = mesh.full_values(nodal_interpolant(mesh, data))

        def sq_diff(x):
            u0 = 1.0 if data.lo <= x <= data.hi else 0.0
            return (np.interp(x, mesh.nodes, full) - u0) ** 2

        val, _ = quad(sq_diff, 0.0, math.pi, points=[data.lo, data.hi],
                      limit=200, epsabs=1e-14, epsrel=1e-13)
        err = math.sqrt(val)
        assert err == pytest.approx(math.sqrt(2 * h / 3), rel=1e-10)


def test_point_mass_rhs_is_unit_vector_at_node():
    mesh = SpatialMesh.uniform(-4.0, 4.0, 63, Z)
    coeffs = point_mass_vector(mesh, 0.0)
    e = np.zeros(65)
    e[32] = 1.0
    assert assemble_mass(mesh).matvec(coeffs) == pytest.approx(e, abs=1e-14)


def test_point_mass_off_node_barycentric():
    mesh = SpatialMesh.uniform(0.0, 1.0, 3, Z)
    coeffs = point_mass_vector(mesh, 0.3)  # element [0.25, 0.5], lambda = 0.2
    e = assemble_mass(mesh).matvec(coeffs)
    assert e == pytest.approx([0.0, 0.8, 0.2, 0.0, 0.0], abs=1e-14)


def test_initial_data_dispatch():
    mesh = SpatialMesh.uniform(0.0, 1.0, 7, D)
    with pytest.raises(ValueError):
        discrete_initial_data(mesh, PointMass(0.5), "l2")
    with pytest.raises(ValueError):
        discrete_initial_data(mesh, Indicator(0.2, 0.8), "dual")
    with pytest.raises(ValueError):
        discrete_initial_data(mesh, Indicator(0.2, 0.8), "ritz")
    with pytest.raises(ValueError):
        Indicator(-0.5, 2.0) and hat_load_indicator(mesh, -0.5, 2.0)
    random = discrete_initial_data(mesh, RandomNodal(11), "l2")
    assert random.shape == (7,)


def test_random_nodal_data_contract():
    mesh = SpatialMesh.uniform(0.0, 1.0, 40, Z)
    a = random_nodal_data(mesh, 123)
    b = random_nodal_data(mesh, 123)
    c = random_nodal_data(mesh, 124)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)
    assert np.all((a >= 0.0) & (a <= 1.0))
    assert np.max(np.abs(a)) <= 1.0


def test_tridiag_shape_validation():
    with pytest.raises(ValueError):
        TriDiagMatrix(np.zeros(3), np.ones(3), np.zeros(2))
