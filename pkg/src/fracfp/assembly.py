"""Finite element matrices and discrete initial data on a 1-D mesh.

Everything is assembled per element, so nonuniform meshes work throughout.
The mass and stiffness integrals of hat functions are closed-form; the
drift term <F(.,t) phi_q, phi_p'> is integrated with a fixed 4-point
Gauss rule per element, exact for polynomial drifts through degree 7 and
in particular for both builtin force fields.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Union

import numpy as np

from .linalg import solve_tridiagonal
from .meshes import BoundaryCondition, SpatialMesh

_GAUSS_ASSEMBLY = np.polynomial.legendre.leggauss(4)
_GAUSS_LOAD = np.polynomial.legendre.leggauss(8)


@dataclass(frozen=True)
class TriDiagMatrix:
    """Tridiagonal operator stored as its three bands.

    ``sub`` and ``sup`` have length n-1, ``diag`` length n.  ``symmetric``
    records that the matrix was built from a symmetric bilinear form.
    """

    sub: np.ndarray
    diag: np.ndarray
    sup: np.ndarray
    symmetric: bool = False

    def __post_init__(self):
        n = self.diag.size
        if self.sub.size != n - 1 or self.sup.size != n - 1:
            raise ValueError("band lengths inconsistent with diagonal")

    @property
    def n(self):
        return self.diag.size

    def matvec(self, x):
        x = np.asarray(x)
        y = self.diag * x
        y[..., :-1] += self.sup * x[..., 1:]
        y[..., 1:] += self.sub * x[..., :-1]
        return y

    def add_scaled(self, other, factor):
        """Return self + factor*other as a new matrix."""
        return TriDiagMatrix(
            self.sub + factor * other.sub,
            self.diag + factor * other.diag,
            self.sup + factor * other.sup,
            symmetric=self.symmetric and other.symmetric,
        )

    def to_dense(self):
        a = np.diag(self.diag)
        a += np.diag(self.sub, -1)
        a += np.diag(self.sup, 1)
        return a


@dataclass(frozen=True)
class DriftField:
    """Force field F(x, t); ``evaluator`` must accept numpy arrays in x."""

    evaluator: Callable[[np.ndarray, float], np.ndarray]
    label: str

    def __call__(self, x, t):
        return np.broadcast_to(self.evaluator(x, t), np.shape(x)).astype(float)


def drift_field(label):
    """Builtin force fields by label.

    "linear-sin"   F(x,t) = -x + sin t
    "double-well"  F(x,t) = -x**3 + x + cos t   (downhill force of the
                   quartic double-well potential with an oscillating tilt)
    "zero"         F = 0
    "constant:<c>" F = c
    """
    if isinstance(label, DriftField):
        return label
    if label == "linear-sin":
        return DriftField(lambda x, t: -x + math.sin(t), label)
    if label == "double-well":
        return DriftField(lambda x, t: -(x**3) + x + math.cos(t), label)
    if label == "zero":
        return DriftField(lambda x, t: np.zeros_like(x), label)
    if label.startswith("constant:"):
        c = float(label.split(":", 1)[1])
        return DriftField(lambda x, t: np.full_like(x, c), label)
    raise ValueError(f"unknown drift label: {label!r}")


@dataclass(frozen=True)
class Indicator:
    """Initial density equal to 1 on [lo, hi] and 0 elsewhere."""

    lo: float
    hi: float


@dataclass(frozen=True)
class PointMass:
    """Unit point mass located at x0."""

    x0: float


@dataclass(frozen=True)
class RandomNodal:
    """Independent uniform [0, 1] values at every free node."""

    seed: int


InitialData = Union[Indicator, PointMass, RandomNodal, Callable]


def _restrict(mesh, sub, diag, sup, symmetric):
    if mesh.bc is BoundaryCondition.DIRICHLET:
        sub, diag, sup = sub[1:-1], diag[1:-1], sup[1:-1]
    return TriDiagMatrix(sub, diag, sup, symmetric=symmetric)


def assemble_mass(mesh):
    """Gram matrix of the hat functions (symmetric positive definite)."""
    h = mesh.element_sizes
    nn = mesh.n_nodes
    diag = np.zeros(nn)
    diag[:-1] += h / 3.0
    diag[1:] += h / 3.0
    off = h / 6.0
    return _restrict(mesh, off, diag, off.copy(), symmetric=True)


def assemble_stiffness(mesh):
    """Gram matrix of the hat-function derivatives (symmetric psd)."""
    h = mesh.element_sizes
    nn = mesh.n_nodes
    diag = np.zeros(nn)
    diag[:-1] += 1.0 / h
    diag[1:] += 1.0 / h
    off = -1.0 / h
    return _restrict(mesh, off, diag, off.copy(), symmetric=True)


def _drift_bands(mesh, drift, t_eval):
    # Per element e with nodes (e, e+1): entry contribution
    # s_a * (1/2) * sum_g w_g F(x_g, t) phi_b(x_g), with s_left = -1,
    # s_right = +1 the signs of the test-function slopes.
    g, w = _GAUSS_ASSEMBLY
    xl = mesh.nodes[:-1, None]
    h = mesh.element_sizes[:, None]
    xg = xl + h * (g + 1.0) / 2.0
    fg = drift(xg, t_eval)
    load_left = fg @ (w * (1.0 - g) / 4.0)
    load_right = fg @ (w * (1.0 + g) / 4.0)
    nn = mesh.n_nodes
    diag = np.zeros(nn)
    diag[:-1] -= load_left
    diag[1:] += load_right
    sup = -load_right
    sub = load_left
    return sub, diag, sup


def assemble_operator(mesh, kappa, drift, t_eval):
    """Diffusion-plus-drift operator kappa*<phi_q', phi_p'> - <F phi_q, phi_p'>.

    Nonsymmetric whenever the drift is nonzero; the drift is frozen at
    ``t_eval``.
    """
    if not kappa > 0:
        raise ValueError(f"diffusivity must be positive, got {kappa}")
    drift = drift_field(drift)
    stiff = assemble_stiffness(mesh)
    dsub, ddiag, dsup = _drift_bands(mesh, drift, t_eval)
    drift_mat = _restrict(mesh, dsub, ddiag, dsup, symmetric=False)
    return TriDiagMatrix(
        kappa * stiff.sub - drift_mat.sub,
        kappa * stiff.diag - drift_mat.diag,
        kappa * stiff.sup - drift_mat.sup,
        symmetric=False,
    )


def basis_integrals(mesh):
    """Integrals of the free-node hat functions, i.e. int phi_p dx.

    Dotting these with a coefficient vector gives the exact integral of
    the piecewise-linear function, used for mass accounting.
    """
    h = mesh.element_sizes
    w = np.zeros(mesh.n_nodes)
    w[:-1] += h / 2.0
    w[1:] += h / 2.0
    return w[mesh.free_slice].copy()


def hat_load_indicator(mesh, lo, hi):
    """Exact loads int_{lo}^{hi} phi_p dx for all free nodes.

    Elements cut by lo or hi are split at the cut, so off-node jump
    locations are integrated exactly as well.
    """
    if not (mesh.a <= lo < hi <= mesh.b):
        raise ValueError(
            f"indicator [{lo}, {hi}] not inside [{mesh.a}, {mesh.b}]"
        )
    x = mesh.nodes
    h = mesh.element_sizes
    xl, xr = x[:-1], x[1:]
    s0 = np.clip(lo, xl, xr)
    s1 = np.clip(hi, xl, xr)
    # int over [s0, s1] of the rising and falling hat restrictions
    right = ((s1 - xl) ** 2 - (s0 - xl) ** 2) / (2.0 * h)
    left = ((xr - s0) ** 2 - (xr - s1) ** 2) / (2.0 * h)
    b = np.zeros(mesh.n_nodes)
    b[:-1] += left
    b[1:] += right
    return b[mesh.free_slice].copy()


def hat_load_function(mesh, func):
    """Loads int f(x) phi_p dx by 8-point Gauss per element."""
    g, w = _GAUSS_LOAD
    xl = mesh.nodes[:-1, None]
    h = mesh.element_sizes[:, None]
    xg = xl + h * (g + 1.0) / 2.0
    fg = np.asarray(func(xg), dtype=float)
    scale = h[:, 0] / 2.0
    left = scale * (fg @ (w * (1.0 - g) / 2.0))
    right = scale * (fg @ (w * (1.0 + g) / 2.0))
    b = np.zeros(mesh.n_nodes)
    b[:-1] += left
    b[1:] += right
    return b[mesh.free_slice].copy()


def l2_projection(mesh, data):
    """Best L2 approximation of the data in the trial space.

    Solves M c = b with b the exact (indicator) or quadrature (callable)
    loads.  Point masses are not in L2; use the dual pairing instead.
    """
    if isinstance(data, PointMass):
        raise ValueError("a point mass has no L2 projection; use method 'dual'")
    if isinstance(data, Indicator):
        b = hat_load_indicator(mesh, data.lo, data.hi)
    elif callable(data):
        b = hat_load_function(mesh, data)
    else:
        raise ValueError(f"cannot project data of type {type(data).__name__}")
    coeffs, _ = solve_tridiagonal(assemble_mass(mesh), b)
    return coeffs


def nodal_interpolant(mesh, data):
    """Trial-space function matching the data at the free nodes.

    Indicator data uses the closed-interval convention: nodes lying
    exactly on a jump get the inside value 1.
    """
    x = mesh.free_nodes
    if isinstance(data, Indicator):
        return ((x >= data.lo) & (x <= data.hi)).astype(float)
    if callable(data):
        return np.asarray(data(x), dtype=float)
    raise ValueError(f"cannot interpolate data of type {type(data).__name__}")


def point_mass_vector(mesh, x0):
    """Coefficients c with M c = e, e_p = phi_p(x0) (dual-pairing data)."""
    if not mesh.a <= x0 <= mesh.b:
        raise ValueError(f"point mass at {x0} outside [{mesh.a}, {mesh.b}]")
    x = mesh.nodes
    e = np.zeros(mesh.n_nodes)
    if x0 >= x[-1]:
        e[-1] = 1.0
    else:
        k = int(np.searchsorted(x, x0, side="right") - 1)
        lam = (x0 - x[k]) / (x[k + 1] - x[k])
        e[k] = 1.0 - lam
        e[k + 1] = lam
    rhs = e[mesh.free_slice].copy()
    coeffs, _ = solve_tridiagonal(assemble_mass(mesh), rhs)
    return coeffs


def random_nodal_data(mesh, seed):
    """Uniform [0, 1] nodal values from a seeded PCG64 generator."""
    rng = np.random.default_rng(seed)
    return rng.uniform(0.0, 1.0, size=mesh.n_free)


def discrete_initial_data(mesh, data, method):
    """Dispatch on the discretisation method: 'l2', 'nodal' or 'dual'."""
    if isinstance(data, RandomNodal):
        return random_nodal_data(mesh, data.seed)
    if method == "l2":
        return l2_projection(mesh, data)
    if method == "nodal":
        return nodal_interpolant(mesh, data)
    if method == "dual":
        if not isinstance(data, PointMass):
            raise ValueError("method 'dual' expects point-mass data")
        return point_mass_vector(mesh, data.x0)
    raise ValueError(f"unknown initial-data method: {method!r}")
