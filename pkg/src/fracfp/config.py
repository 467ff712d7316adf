"""Experiment configuration: a serialisable record of one solver run."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, replace

from .assembly import Indicator, PointMass, discrete_initial_data, drift_field, random_nodal_data
from .meshes import BoundaryCondition, SpatialMesh, TimeGrid

RNG_NAME = "numpy-PCG64"

DESK_SCALE = {"n_steps": 2000, "q_ref": 255}
PAPER_SCALE = {"n_steps": 10_000, "q_ref": 511}

_BC_NAMES = {
    "dirichlet": BoundaryCondition.DIRICHLET,
    "zeroflux": BoundaryCondition.ZERO_FLUX,
}
_INIT_METHODS = ("l2", "nodal", "delta", "random")


def mesh_with_free_count(domain, q_h, bc):
    """Uniform mesh on ``domain`` with exactly ``q_h`` degrees of freedom."""
    a, b = domain
    n_interior = q_h if bc is BoundaryCondition.DIRICHLET else q_h - 2
    return SpatialMesh.uniform(a, b, n_interior, bc)


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything needed to reproduce one run bit for bit."""

    alpha: float
    t_final: float = 1.0
    n_steps: int = 2000
    q_h: int = 63
    kappa: float = 1.0
    gamma: float | None = None  # None means 1/alpha
    bc: str = "dirichlet"
    drift: str = "linear-sin"
    init: str = "l2"
    seed: int | None = None
    xmin: float = 0.0
    xmax: float = math.pi
    indicator_lo: float | None = None  # None: jumps at the quarter points
    indicator_hi: float | None = None
    x0: float | None = None  # None: point mass at the domain midpoint
    scale: str = "desk"

    def validate(self):
        if not 0.0 < self.alpha <= 1.0:
            raise ValueError(f"alpha must be in (0, 1], got {self.alpha}")
        if not self.kappa > 0:
            raise ValueError(f"kappa must be positive, got {self.kappa}")
        if not self.t_final > 0:
            raise ValueError(f"T must be positive, got {self.t_final}")
        if self.n_steps < 0:
            raise ValueError(f"N must be nonnegative, got {self.n_steps}")
        if self.gamma is not None and not self.gamma >= 1.0:
            raise ValueError(f"gamma must be >= 1, got {self.gamma}")
        if self.bc not in _BC_NAMES:
            raise ValueError(f"bc must be one of {sorted(_BC_NAMES)}")
        if self.init not in _INIT_METHODS:
            raise ValueError(f"init must be one of {_INIT_METHODS}")
        if not self.xmax > self.xmin:
            raise ValueError(f"empty domain [{self.xmin}, {self.xmax}]")
        min_q = 1 if self.bc == "dirichlet" else 3
        if self.q_h < min_q:
            raise ValueError(f"q_h must be at least {min_q} for bc={self.bc}")
        if self.scale not in ("desk", "paper"):
            raise ValueError(f"scale must be 'desk' or 'paper', got {self.scale}")
        drift_field(self.drift)

    @property
    def boundary_condition(self):
        return _BC_NAMES[self.bc]

    @property
    def grading(self):
        return 1.0 / self.alpha if self.gamma is None else self.gamma

    def build_mesh(self):
        return mesh_with_free_count(
            (self.xmin, self.xmax), self.q_h, self.boundary_condition
        )

    def build_grid(self):
        if self.n_steps == 0:
            return TimeGrid([0.0])
        return TimeGrid.graded(self.n_steps, self.t_final, self.grading)

    def initial_profile(self):
        """The initial-data description selected by ``init``."""
        if self.init == "random":
            return None
        if self.init == "delta":
            x0 = 0.5 * (self.xmin + self.xmax) if self.x0 is None else self.x0
            return PointMass(x0)
        span = self.xmax - self.xmin
        lo = self.xmin + span / 4 if self.indicator_lo is None else self.indicator_lo
        hi = self.xmin + 3 * span / 4 if self.indicator_hi is None else self.indicator_hi
        return Indicator(lo, hi)

    def build_initial_data(self, mesh):
        if self.init == "random":
            return random_nodal_data(mesh, 0 if self.seed is None else self.seed)
        method = {"l2": "l2", "nodal": "nodal", "delta": "dual"}[self.init]
        return discrete_initial_data(mesh, self.initial_profile(), method)

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, data):
        return cls(**data)

    def to_json(self, **kwargs):
        return json.dumps(self.to_dict(), **kwargs)

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))

    def with_overrides(self, **kwargs):
        return replace(self, **kwargs)


RESONANCE_PRESET = ExperimentConfig(
    alpha=0.75,
    t_final=20.0,
    n_steps=4096,
    q_h=65,
    gamma=2.0,
    bc="zeroflux",
    drift="double-well",
    init="delta",
    xmin=-4.0,
    xmax=4.0,
)
