"""Connectivity conditions on the pair schedule.

Sets are vertices and each pair (s, t) is a directed edge. Linear
convergence needs the graph to be connected; the sharper analysis also
asks for a closed walk through an anchor set plus a star of edges leaving
that anchor, which the witness spells out.
"""

from gdrkit.cyclic import fully_connected_witness, is_connected

patterns = {
    "path 0-1-2": (3, [(0, 1), (1, 2)]),
    "triangle": (3, [(0, 1), (1, 2), (2, 0)]),
    "star from 0": (4, [(0, 1), (0, 2), (0, 3)]),
    "two components": (4, [(0, 1), (2, 3)]),
    "cycle plus tail": (4, [(0, 1), (1, 0), (0, 2), (2, 3)]),
}
for name, (m, pairs) in patterns.items():
    w = fully_connected_witness(m, pairs)
    print(f"{name:16s} connected={is_connected(m, pairs)!s:5s} witness={w}")
