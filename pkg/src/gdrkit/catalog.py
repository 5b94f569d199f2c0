"""Built-in problem instances.

Each builder returns a fresh :class:`ProblemInstance`. Names such as
``two-lines-45deg`` or ``random-polyhedra-m2-n3-s7`` are resolved by
:func:`get_instance`; ``list_instances`` describes the families.
"""

import re
from dataclasses import dataclass, field, replace

import numpy as np

from .cyclic import CyclicSchedule
from .geometry import AffineSubspace
from .operators import named_operator
from .regularity import hyperplane_kappa
from .sets import (
    AffineSet,
    Ball,
    Box,
    EpiAbs,
    FinitePoints,
    Halfspace,
    Hyperplane,
    Polyhedron,
    polyhedral_intersection,
)

DR = (2.0, 2.0, 0.5)
AP = (1.0, 1.0, 1.0)


@dataclass
class ProblemInstance:
    """Sets, a pair schedule with parameters, and optional analytic data.

    ``analytic`` may hold ``thetas`` (one per pair), ``kappa`` (for the
    Z-system), ``pair_kappas``, ``expected_rate`` (per step) and ``notes``.
    """

    name: str
    sets: list
    pairs: list
    params: list
    intersection_hint: object = None
    reference_point: object = None
    x0: object = None
    analytic: dict = field(default_factory=dict)
    pair_hints: dict = field(default_factory=dict)
    description: str = ""

    @property
    def dim(self):
        return self.sets[0].dim

    def schedule(self, params=None):
        return CyclicSchedule(self.sets, self.pairs, params if params is not None else self.params,
                              intersection_hint=self.intersection_hint, pair_hints=self.pair_hints)

    def with_params(self, params):
        return replace(self, params=list(params))


def _origin(n):
    return FinitePoints(np.zeros((1, n)))


def _line(angle):
    """Line through the origin at `angle` (radians) from the x-axis."""
    return Hyperplane([-np.sin(angle), np.cos(angle)], 0.0)


def two_lines(phi_deg=45.0):
    phi = np.deg2rad(phi_deg)
    A, B = _line(0.0), _line(phi)
    c = abs(float(np.dot(A.normal, B.normal)))
    return ProblemInstance(
        name=f"two-lines-{phi_deg:g}deg",
        sets=[A, B],
        pairs=[(0, 1)],
        params=[DR],
        intersection_hint=_origin(2),
        reference_point=np.zeros(2),
        x0=np.array([1.0, 0.0]),
        analytic={"thetas": [c], "kappa": hyperplane_kappa(A.normal, B.normal),
                  "pair_kappas": [hyperplane_kappa(A.normal, B.normal)],
                  "expected_rate": float(np.cos(phi)),
                  "notes": "theta is |cos phi|; kappa from the two-hyperplane formula; "
                           "classical DR on two lines contracts by cos phi per step"},
        description="x-axis and the line at angle phi through the origin",
    )


def parallel_lines_gap(d=1.0):
    A = Hyperplane([0.0, 1.0], 0.0)
    B = Hyperplane([0.0, 1.0], d)
    return ProblemInstance(
        name=f"parallel-lines-gap-{d:g}",
        sets=[A, B],
        pairs=[(0, 1)],
        params=[AP],
        x0=np.array([3.0, 7.0]),
        analytic={"gap": [0.0, float(d)], "notes": "inconsistent pair; the gap is the offset"},
        description="x-axis and its translate by d (empty intersection)",
    )


def perpendicular_hyperplanes(n=3):
    if n < 2:
        raise ValueError("need n >= 2")
    e = np.eye(n)
    A, B = Hyperplane(e[0], 0.0), Hyperplane(e[1], 0.0)
    inter = AffineSet(AffineSubspace(np.zeros(n), e[2:]))
    return ProblemInstance(
        name=f"perpendicular-hyperplanes-r{n}",
        sets=[A, B],
        pairs=[(0, 1)],
        params=[DR],
        intersection_hint=inter,
        reference_point=np.zeros(n),
        x0=np.ones(n),
        analytic={"thetas": [0.0], "kappa": np.sqrt(2.0), "pair_kappas": [np.sqrt(2.0)],
                  "expected_rate": 0.0},
        description="{x_1 = 0} and {x_2 = 0} in R^n",
    )


def three_lines_epsilon(eps=0.05):
    C1 = Hyperplane([0.0, 1.0], 0.0)
    C2 = Hyperplane([-eps, 1.0], 0.0)
    C3 = Hyperplane([1.0, 0.0], 0.0)
    return ProblemInstance(
        name=f"three-lines-epsilon-{eps:g}",
        sets=[C1, C2, C3],
        pairs=[(0, 1), (1, 2), (2, 0)],
        params=[DR] * 3,
        intersection_hint=_origin(2),
        reference_point=np.zeros(2),
        x0=np.array([1.0, 0.5]),
        analytic={"kappa_system": np.sqrt(2.0),
                  "pair_kappas": [hyperplane_kappa(C1.normal, C2.normal), hyperplane_kappa(C2.normal, C3.normal),
                                  hyperplane_kappa(C3.normal, C1.normal)],
                  "pair_kappa_lower": float(np.sqrt(1.0 + 1.0 / eps ** 2)),
                  "notes": "the pair {C1, C2} has modulus at least sqrt(1 + 1/eps^2); the triple has sqrt(2)"},
        description="x-axis, the line through (1, eps), and the y-axis",
    )


def three_planes_epsilon(eps=0.05):
    n1 = np.array([0.0, 0.0, 1.0])
    n2 = np.array([1.0, 0.0, 0.0])
    n3 = np.array([1.0, -eps, 1.0]) / np.sqrt(2.0 + eps ** 2)
    C = [Hyperplane(n, 0.0) for n in (n1, n2, n3)]
    return ProblemInstance(
        name=f"three-planes-epsilon-{eps:g}",
        sets=C,
        pairs=[(0, 1), (1, 2), (2, 0)],
        params=[DR] * 3,
        intersection_hint=_origin(3),
        reference_point=np.zeros(3),
        x0=np.array([1.0, 1.0, 1.0]),
        analytic={"pair_kappas": [hyperplane_kappa(n1, n2), hyperplane_kappa(n2, n3), hyperplane_kappa(n3, n1)],
                  "kappa_system_lower": float(np.sqrt(1.0 + 1.0 / eps ** 2)),
                  "notes": "pairwise moduli stay bounded while the system modulus grows like 1/eps"},
        description="three planes through the origin; the third nearly contains the line C1 n C3",
    )


def quadrant_pair():
    inf = np.inf
    A = Box([0.0, 0.0], [inf, inf])
    B = Box([-inf, -inf], [0.0, 0.0])
    return ProblemInstance(
        name="quadrant-pair",
        sets=[A, B],
        pairs=[(0, 1)],
        params=[DR],
        intersection_hint=_origin(2),
        reference_point=np.zeros(2),
        x0=np.array([1.0, -2.0]),
        analytic={"thetas": [1.0], "kappa": np.sqrt(2.0), "pair_kappas": [np.sqrt(2.0)],
                  "notes": "linearly regular, but the CQ-number at the origin is 1"},
        description="nonnegative and nonpositive quadrants of R^2",
    )


def remark_str_lin():
    C1 = Halfspace([1.0, 1.0], 0.0)
    C2 = Halfspace([1.0, -1.0], 0.0)
    C3 = Halfspace([-1.0, 0.0], 0.0)
    return ProblemInstance(
        name="remark-str-lin",
        sets=[C1, C2, C3],
        pairs=[(0, 1), (1, 2), (2, 0)],
        params=[DR] * 3,
        intersection_hint=_origin(2),
        reference_point=np.zeros(2),
        x0=np.array([1.0, 0.3]),
        analytic={"notes": "every proper subsystem is affine-hull regular at 0, the triple is only linearly regular"},
        description="{x + y <= 0}, {x - y <= 0}, {x >= 0} in R^2",
    )


def four_set_r3(params2=AP):
    inf = np.inf
    C1 = Box([0.0, -inf, 0.0], [inf, inf, 0.0])
    C2 = Box([-inf, 0.0, 0.0], [inf, inf, 0.0])
    C3 = AffineSet(AffineSubspace(np.zeros(3), np.array([[1.0, 0.0, 0.0], [0.0, 1.0, 1.0] / np.sqrt(2.0)])))
    C4 = Box([0.0, -inf, -inf], [inf, inf, inf])
    sets = [C1, C2, C3, C4]
    return ProblemInstance(
        name="four-set-r3",
        sets=sets,
        pairs=[(0, 1), (2, 3)],
        params=[DR, tuple(params2)],
        intersection_hint=polyhedral_intersection(sets),
        reference_point=np.zeros(3),
        x0=np.array([1.0, 1.0, 1.0]),
        analytic={"xbar": [1.0, 1.0, 1.0],
                  "notes": "(1,1,1) is fixed by both operators but its shadows on the sets disagree"},
        description="R+ x R x {0}, R x R+ x {0}, {(a, b, b)}, R+ x R^2 with pairs (C1,C2) and (C3,C4)",
    )


def epi_abs_axis(alpha=0.5):
    A = EpiAbs(2, (0, 1))
    B = Hyperplane([0.0, 1.0], 0.0)
    return ProblemInstance(
        name="epi-abs-axis",
        sets=[A, B],
        pairs=[(0, 1)],
        params=[(2.0, 2.0, alpha)],
        intersection_hint=_origin(2),
        reference_point=np.zeros(2),
        x0=np.array([0.0, -1.0]),
        analytic={"thetas": [1.0], "kappa": np.sqrt(2.0), "pair_kappas": [np.sqrt(2.0)],
                  "notes": "(0, -1) is a fixed point of the Douglas-Rachford operator at distance 1 "
                           "from the intersection; the operator is not quasi coercive there"},
        description="epigraph {t >= |s|} and the s-axis",
    )


def ball_vs_halfspace():
    A = Ball([0.0, 0.0], 1.0)
    B = Halfspace([-1.0, 0.0], -2.0)
    return ProblemInstance(
        name="ball-vs-halfspace",
        sets=[A, B],
        pairs=[(0, 1)],
        params=[AP],
        x0=np.array([0.0, 3.0]),
        analytic={"gap": [1.0, 0.0], "notes": "nearest points (1, 0) and (2, 0)"},
        description="unit ball and {x >= 2} (empty intersection)",
    )


def anchored_halfspaces():
    sets = [Halfspace([1.0, 0.0], 0.0), Halfspace([0.0, 1.0], 0.0), Halfspace([-1.0, -1.0], 1.0)]
    return ProblemInstance(
        name="anchored-halfspaces",
        sets=sets,
        pairs=[(0, 1), (0, 2)],
        params=[DR, DR],
        intersection_hint=polyhedral_intersection(sets),
        reference_point=np.zeros(2),
        x0=np.array([3.0, 2.0]),
        description="{x <= 0}, {y <= 0}, {x + y >= -1} with the anchored pairs (C1,C2), (C1,C3)",
    )


def random_polyhedra(m=2, n=3, seed=0, k=3):
    """`m` random polyhedra of `k` halfspaces each sharing an interior point."""
    rng = np.random.default_rng(seed)
    p = rng.standard_normal(n)
    sets = []
    for _ in range(m):
        N = rng.standard_normal((k, n))
        N /= np.linalg.norm(N, axis=1)[:, None]
        b = N @ p + rng.uniform(0.05, 0.5, k)
        sets.append(Polyhedron(normals=N, offsets=b))
    pairs = [(0, 1)] if m == 2 else [(i, (i + 1) % m) for i in range(m)]
    return ProblemInstance(
        name=f"random-polyhedra-m{m}-n{n}-s{seed}",
        sets=sets,
        pairs=pairs,
        params=[DR] * len(pairs),
        intersection_hint=polyhedral_intersection(sets),
        reference_point=p,
        x0=p + 3.0 * rng.standard_normal(n),
        analytic={"common_point": p.tolist()},
        description="random polyhedra with a common interior point",
    )


def random_convex_pair(seed=0, n=None):
    """Two random sets drawn from halfspaces, boxes and balls that share a
    point, together with an exact or Dykstra-ready intersection."""
    rng = np.random.default_rng(seed)
    n = int(n or rng.integers(2, 4))
    p = rng.standard_normal(n)

    def draw():
        kind = rng.integers(3)
        if kind == 0:
            a = rng.standard_normal(n)
            a /= np.linalg.norm(a)
            return Halfspace(a, a @ p + rng.uniform(0.0, 0.5))
        if kind == 1:
            lo = p - rng.uniform(0.0, 1.0, n)
            return Box(lo, lo + rng.uniform(0.2, 2.0, n) + (p - lo).clip(0))
        c = p + rng.standard_normal(n) * 0.5
        return Ball(c, np.linalg.norm(c - p) + rng.uniform(0.0, 0.5))

    sets = [draw(), draw()]
    return ProblemInstance(
        name=f"random-convex-pair-s{seed}",
        sets=sets,
        pairs=[(0, 1)],
        params=[DR],
        intersection_hint=polyhedral_intersection(sets),
        reference_point=p,
        x0=p + 4.0 * rng.standard_normal(n),
        analytic={"common_point": p.tolist()},
        description="random pair of halfspaces, boxes and balls with a common point",
    )


_NUM = r"([0-9]*\.?[0-9]+(?:e-?[0-9]+)?)"

_FAMILIES = [
    (re.compile(rf"two-lines-{_NUM}deg"), lambda g: two_lines(float(g[0])), "two-lines-<phi>deg"),
    (re.compile(r"two-lines"), lambda g: two_lines(), "two-lines (phi = 45)"),
    (re.compile(rf"parallel-lines-gap-{_NUM}"), lambda g: parallel_lines_gap(float(g[0])), "parallel-lines-gap-<d>"),
    (re.compile(r"parallel-lines-gap"), lambda g: parallel_lines_gap(), "parallel-lines-gap (d = 1)"),
    (re.compile(r"perpendicular-hyperplanes-r([0-9]+)"), lambda g: perpendicular_hyperplanes(int(g[0])),
     "perpendicular-hyperplanes-r<n>"),
    (re.compile(r"perpendicular-hyperplanes"), lambda g: perpendicular_hyperplanes(), "perpendicular-hyperplanes (n = 3)"),
    (re.compile(rf"three-lines-epsilon-{_NUM}"), lambda g: three_lines_epsilon(float(g[0])), "three-lines-epsilon-<eps>"),
    (re.compile(r"three-lines-epsilon"), lambda g: three_lines_epsilon(), "three-lines-epsilon (eps = 0.05)"),
    (re.compile(rf"three-planes-epsilon-{_NUM}"), lambda g: three_planes_epsilon(float(g[0])), "three-planes-epsilon-<eps>"),
    (re.compile(r"three-planes-epsilon"), lambda g: three_planes_epsilon(), "three-planes-epsilon (eps = 0.05)"),
    (re.compile(r"quadrant-pair"), lambda g: quadrant_pair(), "quadrant-pair"),
    (re.compile(r"remark-str-lin"), lambda g: remark_str_lin(), "remark-str-lin"),
    (re.compile(r"four-set-r3"), lambda g: four_set_r3(), "four-set-r3"),
    (re.compile(r"epi-abs-axis"), lambda g: epi_abs_axis(), "epi-abs-axis"),
    (re.compile(r"ball-vs-halfspace"), lambda g: ball_vs_halfspace(), "ball-vs-halfspace"),
    (re.compile(r"anchored-halfspaces"), lambda g: anchored_halfspaces(), "anchored-halfspaces"),
    (re.compile(r"random-polyhedra-m([0-9]+)-n([0-9]+)-s([0-9]+)"),
     lambda g: random_polyhedra(int(g[0]), int(g[1]), int(g[2])), "random-polyhedra-m<m>-n<n>-s<seed>"),
    (re.compile(r"random-polyhedra"), lambda g: random_polyhedra(), "random-polyhedra (m = 2, n = 3, seed = 0)"),
    (re.compile(r"random-convex-pair-s([0-9]+)"), lambda g: random_convex_pair(int(g[0])), "random-convex-pair-s<seed>"),
]


def get_instance(name):
    for pattern, build, _ in _FAMILIES:
        mt = pattern.fullmatch(name)
        if mt:
            return build(mt.groups())
    raise KeyError(f"unknown instance {name!r}")


def list_instances():
    out = []
    for _, build, label in _FAMILIES:
        if "<" in label:
            out.append({"name": label, "description": "parameterized family"})
            continue
        inst = build(())
        out.append({"name": inst.name, "description": inst.description, "dim": inst.dim,
                    "sets": len(inst.sets), "pairs": [list(p) for p in inst.pairs]})
    return out


def default_operator(kind, inst, alpha=None):
    """Parameters of a named operator, applied to every pair of `inst`."""
    T = named_operator(kind, inst.sets[inst.pairs[0][0]], inst.sets[inst.pairs[0][1]], alpha=alpha, warn=False)
    return [T.params] * len(inst.pairs)
