"""Reproduce the two convergence tables at desk scale.

A reference solution on a fine mesh (255 dofs) stands in for the exact
solution; coarse runs on 7..63 dofs measure the weighted error E* and the
observed order sigma.  Projection initial data gives second order,
nodal-interpolant data only first order because the interpolant of the
discontinuous density is an O(sqrt(h)) perturbation of the projection.

Run time is roughly ten seconds.  Pass --paper for the full-size setup
(N = 10000 steps, 511-dof reference; takes minutes).
"""

import sys

from fracfp import run_convergence_study

paper = "--paper" in sys.argv
n_steps, q_ref = (10_000, 511) if paper else (2_000, 255)

for init, label in [("l2", "projection data"), ("nodal", "interpolant data")]:
    table = run_convergence_study(
        [0.25, 0.5, 0.75],
        [7, 15, 31, 63],
        q_ref,
        n_steps,
        init,
        log=lambda msg: print("  ..", msg),
    )
    print(f"\nweighted errors and orders, {label}:")
    print(table)
