"""Sampled regularity constants and how they degrade.

Three lines through the origin: the x-axis, the line through (1, eps) and
the y-axis. As eps shrinks the first two lines close up and their pairwise
modulus grows like sqrt(1 + 1/eps^2). Adding the y-axis repairs the system:
its modulus stays at sqrt(2). The sampled numbers are lower bounds of the
true suprema.
"""

import numpy as np

from gdrkit import estimate_cq_number, estimate_linreg_modulus
from gdrkit.catalog import three_lines_epsilon

print(f"{'eps':>6s} {'kappa(C1,C2)':>13s} {'kappa system':>13s} {'sqrt(1+1/eps^2)':>16s}")
for eps in (0.4, 0.2, 0.1, 0.05):
    inst = three_lines_epsilon(eps)
    C = inst.sets
    w = inst.reference_point
    pair = estimate_linreg_modulus([C[0], C[1]], inst.intersection_hint, w, 1.0, 5000, 0)
    full = estimate_linreg_modulus(C, inst.intersection_hint, w, 1.0, 5000, 0)
    print(f"{eps:6.2f} {pair.value:13.4f} {full.value:13.4f} {np.sqrt(1 + 1 / eps ** 2):16.4f}")

inst = three_lines_epsilon(0.1)
C = inst.sets
theta = estimate_cq_number(C[0], C[1], None, inst.reference_point, 1.0, 5000, 0)
print("\nCQ-number of the first two lines:", round(theta.value, 6),
      "against the cosine of their angle,", round(1 / np.sqrt(1.01), 6))
