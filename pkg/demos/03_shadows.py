"""Shadows of a limit point under different pairs.

With several pairs, a common limit of the cyclic iteration need not lie in
the intersection itself; what matters is where its projections ("shadows") onto
the individual sets land. In the four-set example the shadows of (1, 1, 1)
disagree, so that point certifies nothing. For the anchored half-planes the
run converges and every shadow lands on the same feasible point.
"""

import numpy as np

from gdrkit import cyclic_run, shadow_consensus
from gdrkit.catalog import anchored_halfspaces, four_set_r3

S = four_set_r3().schedule()
rep = shadow_consensus(S, np.ones(3))
print("four sets, x = (1, 1, 1)")
for j, p in enumerate(rep.projections):
    print(f"  projection onto C{j + 1}: {np.round(p, 6)}")
print("  all equal:", rep.all_equal, " in intersection:", rep.in_intersection)

inst = anchored_halfspaces()
S = inst.schedule()
traj = cyclic_run(S, inst.x0, 2000, stop_tol=1e-13)
rep = shadow_consensus(S, traj.final)
print("\nanchored half-planes from", inst.x0)
print("  limit:", np.round(traj.final, 8), " after", traj.n_steps, "steps")
print("  all equal:", rep.all_equal, " in intersection:", rep.in_intersection)
