"""Spatial meshes on an interval and graded time grids.

Both objects are immutable after construction and are shared read-only by
the assembly, stepping and analysis routines.
"""

from __future__ import annotations

from enum import Enum

import numpy as np


class BoundaryCondition(Enum):
    """How the trial space treats the interval endpoints.

    DIRICHLET: basis functions vanish at both endpoints, so the free nodes
    are the interior ones.  ZERO_FLUX: the endpoint hat functions are kept
    and every node is free.
    """

    DIRICHLET = "dirichlet"
    ZERO_FLUX = "zeroflux"


def _readonly(a):
    a = np.ascontiguousarray(a, dtype=float)
    a.flags.writeable = False
    return a


class SpatialMesh:
    """Partition a <= x_0 < x_1 < ... < x_{P+1} <= b with hat-function basis.

    Parameters
    ----------
    nodes : array_like
        Strictly increasing node coordinates, endpoints included.
    bc : BoundaryCondition
        Selects which nodes carry degrees of freedom.
    """

    def __init__(self, nodes, bc):
        nodes = _readonly(nodes)
        if nodes.ndim != 1 or nodes.size < 3:
            raise ValueError("mesh needs at least one interior node")
        if not np.all(np.diff(nodes) > 0):
            raise ValueError("mesh nodes must be strictly increasing")
        if not isinstance(bc, BoundaryCondition):
            raise ValueError(f"not a boundary condition: {bc!r}")
        self.nodes = nodes
        self.bc = bc
        self.element_sizes = _readonly(np.diff(nodes))

    @classmethod
    def uniform(cls, a, b, n_interior, bc):
        """Uniform mesh with ``n_interior`` interior nodes on [a, b].

        Spacing is h = (b - a)/(n_interior + 1).  Coordinates are computed
        as a + i*(b - a)/(n_interior + 1) so that meshes refined by a
        power-of-two ratio reproduce the coarse nodes bit for bit.
        """
        if not b > a:
            raise ValueError(f"empty interval: [{a}, {b}]")
        n_interior = int(n_interior)
        if n_interior < 1:
            raise ValueError("need at least one interior node")
        idx = np.arange(n_interior + 2, dtype=float)
        nodes = a + idx * (b - a) / (n_interior + 1)
        return cls(nodes, bc)

    @property
    def a(self):
        return float(self.nodes[0])

    @property
    def b(self):
        return float(self.nodes[-1])

    @property
    def n_nodes(self):
        return self.nodes.size

    @property
    def n_elements(self):
        return self.nodes.size - 1

    @property
    def h_max(self):
        return float(self.element_sizes.max())

    @property
    def free_slice(self):
        """Slice selecting the free nodes out of the full node array."""
        if self.bc is BoundaryCondition.DIRICHLET:
            return slice(1, -1)
        return slice(None)

    @property
    def free_nodes(self):
        return self.nodes[self.free_slice]

    @property
    def n_free(self):
        """Number of degrees of freedom (Q_h)."""
        if self.bc is BoundaryCondition.DIRICHLET:
            return self.n_nodes - 2
        return self.n_nodes

    def full_values(self, coeffs):
        """Expand free-node coefficients to values at every node.

        Dirichlet endpoints are filled with zero.
        """
        coeffs = np.asarray(coeffs, dtype=float)
        if coeffs.shape[-1] != self.n_free:
            raise ValueError(
                f"expected {self.n_free} coefficients, got {coeffs.shape[-1]}"
            )
        if self.bc is BoundaryCondition.ZERO_FLUX:
            return coeffs
        full = np.zeros(coeffs.shape[:-1] + (self.n_nodes,))
        full[..., 1:-1] = coeffs
        return full

    def __repr__(self):
        return (
            f"SpatialMesh([{self.a}, {self.b}], n_free={self.n_free}, "
            f"bc={self.bc.value})"
        )


class TimeGrid:
    """Time levels 0 = t_0 < t_1 < ... < t_N = T with steps k_n = t_n - t_{n-1}."""

    def __init__(self, levels):
        levels = _readonly(levels)
        if levels.ndim != 1 or levels.size < 1:
            raise ValueError("need at least the t=0 level")
        if levels[0] != 0.0:
            raise ValueError("time grid must start at t=0")
        if levels.size > 1 and not np.all(np.diff(levels) > 0):
            raise ValueError("time levels must be strictly increasing")
        self.levels = levels
        self.steps = _readonly(np.diff(levels))

    @classmethod
    def graded(cls, n_steps, t_final, gamma=1.0):
        """Grid with levels t_n = (n/N)**gamma * T.

        gamma = 1 gives uniform steps; gamma > 1 concentrates steps near
        t = 0.  gamma < 1 (anti-grading) is rejected.
        """
        n_steps = int(n_steps)
        if n_steps < 1:
            raise ValueError("need at least one time step")
        if not t_final > 0:
            raise ValueError("final time must be positive")
        if not gamma >= 1.0:
            raise ValueError(f"grading exponent must be >= 1, got {gamma}")
        frac = np.arange(n_steps + 1, dtype=float) / n_steps
        return cls(frac**gamma * t_final)

    @property
    def n_steps(self):
        return self.levels.size - 1

    @property
    def t_final(self):
        return float(self.levels[-1])

    def __repr__(self):
        return f"TimeGrid(n_steps={self.n_steps}, T={self.t_final})"
