"""Two parallel lines: no common point, but a well defined gap.

The gap vector g is the displacement between the nearest points of the
two sets. Alternating projections (lam = mu = 1) then have fixed points
E + g, and the general operator keeps a whole family of them.
"""

import numpy as np

from gdrkit import GdrOperator, compute_gap, cyclic_run, fixed_point_check
from gdrkit.catalog import parallel_lines_gap

inst = parallel_lines_gap(1.0)
A, B = inst.sets
gap = compute_gap(A, B)
print("gap vector g:", gap.g, "converged:", gap.converged)

for lam, mu, alpha in [(1.0, 1.0, 1.0), (1.5, 1.5, 0.5), (2.0, 1.2, 0.5)]:
    T = GdrOperator(A, B, lam, mu, alpha)
    S = inst.with_params([(lam, mu, alpha)]).schedule()
    traj = cyclic_run(S, [4.0, 3.0], 10_000, stop_tol=1e-10)
    rep = fixed_point_check(T, traj.final)
    print(f"params ({lam}, {mu}, {alpha}): {traj.n_steps} steps, limit {np.round(traj.final, 6)}, "
          f"fixed {rep.is_fixed}, offset coefficient {rep.classification.get('coefficient')}")
