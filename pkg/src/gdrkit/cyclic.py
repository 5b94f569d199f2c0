"""Cyclic gDR over an indexed family of sets.

Indices are 0-based: sets are ``C_0, ..., C_{m-1}`` and operators
``T_0, ..., T_{l-1}``. A cycle applies all l operators once, in order, and
the cycle length is always the number of operators.
"""

from collections import deque
from dataclasses import dataclass

import numpy as np

from .diagnostics import TrajectoryReport
from .geometry import NonFiniteError, affine_hull_of_points, as_vec, project_affine
from .operators import GdrOperator, gdr_step
from .sets import polyhedral_intersection

MAX_GRAPH_SETS = 8
DYKSTRA_TOL = 1e-10


class NumericalAbort(RuntimeError):
    """Raised when an iterate stops being finite."""


class UnsupportedSize(ValueError):
    pass


def dykstra_project(sets, x, tol=DYKSTRA_TOL, max_iter=20_000):
    """Projection onto the intersection of convex sets by Dykstra's method.

    Stops when a full sweep changes the iterate by less than `tol`.
    """
    x = as_vec(x)
    y = x.copy()
    incr = [np.zeros_like(x) for _ in sets]
    for _ in range(max_iter):
        prev = y
        for i, C in enumerate(sets):
            z = y + incr[i]
            y = C.project(z)
            incr[i] = z - y
        if np.linalg.norm(y - prev) < tol:
            return y
    return y


class PairIntersection:
    """Distance oracle for ``C_s n C_t``.

    Uses an explicit hint when given, an exact Polyhedron when both sets are
    polyhedral, and Dykstra's method for other convex pairs.
    """

    def __init__(self, sets, hint=None):
        self.sets = list(sets)
        self.hint = hint if hint is not None else polyhedral_intersection(self.sets)
        if self.hint is None and not all(C.convex for C in self.sets):
            raise ValueError("nonconvex pair: an explicit intersection hint is required")
        self.dim = self.sets[0].dim

    def project(self, x):
        if self.hint is not None:
            return self.hint.project(x)
        return dykstra_project(self.sets, x)

    def distance(self, x):
        x = as_vec(x, self.dim)
        if self.hint is not None:
            return self.hint.distance(x)
        return float(np.linalg.norm(x - self.project(x)))

    def contains(self, x, tol=1e-9):
        return self.distance(x) <= tol


@dataclass
class CyclicSchedule:
    """Ordered gDR operators over a family of sets.

    Parameters
    ----------
    sets : list of ProjectableSet
    pairs : list of (s, t)
        Operator j uses ``A = sets[s]`` and ``B = sets[t]``.
    params : list of (lam, mu, alpha)
        One triple per pair, or a single triple shared by all.
    intersection_hint : ProjectableSet, optional
        Exact description of the full intersection, used for ``d_C``.
    pair_hints : dict, optional
        ``{j: set}`` exact descriptions of pair intersections.
    """

    sets: list
    pairs: list
    params: list
    intersection_hint: object = None
    pair_hints: dict = None

    def __post_init__(self):
        self.sets = list(self.sets)
        m = len(self.sets)
        if m == 0:
            raise ValueError("schedule needs at least one set")
        n = self.sets[0].dim
        if any(C.dim != n for C in self.sets):
            raise ValueError("sets live in different dimensions")
        self.pairs = [(int(s), int(t)) for s, t in self.pairs]
        if not self.pairs:
            raise ValueError("schedule needs at least one pair")
        for s, t in self.pairs:
            if s == t:
                raise ValueError(f"pair ({s}, {t}) repeats a set")
            if not (0 <= s < m and 0 <= t < m):
                raise ValueError(f"pair ({s}, {t}) refers to a missing set")
        covered = {i for p in self.pairs for i in p}
        if covered != set(range(m)):
            raise ValueError(f"pairs do not cover every set: missing {sorted(set(range(m)) - covered)}")
        params = [tuple(float(v) for v in p) for p in np.atleast_2d(np.asarray(self.params, dtype=float))]
        if len(params) == 1 and len(self.pairs) > 1:
            params = params * len(self.pairs)
        if len(params) != len(self.pairs):
            raise ValueError("need one parameter triple per pair")
        self.params = params
        self.pair_hints = dict(self.pair_hints or {})
        self.operators = [GdrOperator(self.sets[s], self.sets[t], *p) for (s, t), p in zip(self.pairs, params)]

    @property
    def dim(self):
        return self.sets[0].dim

    @property
    def m(self):
        return len(self.sets)

    @property
    def n_ops(self):
        return len(self.pairs)

    @property
    def convex(self):
        return all(C.convex for C in self.sets)

    def pair_intersection(self, j):
        s, t = self.pairs[j]
        return PairIntersection([self.sets[s], self.sets[t]], self.pair_hints.get(j))

    def pair_hull(self, j):
        s, t = self.pairs[j]
        pts = list(self.sets[s].spanning_points()) + list(self.sets[t].spanning_points())
        return affine_hull_of_points(pts)


class ZSet:
    """``Z_j``: the pair intersection, enlarged by ``(L_j - L_j)^perp`` when
    both relaxation parameters equal 2 (``L_j = aff(C_s u C_t)``)."""

    def __init__(self, j, base, hull=None):
        self.j = j
        self.base = base
        self.hull = hull
        self.dim = base.dim

    @property
    def has_complement(self):
        return self.hull is not None and not self.hull.is_whole_space

    def distance(self, x):
        x = as_vec(x, self.dim)
        if self.hull is not None:
            x = project_affine(self.hull, x)
        return self.base.distance(x)

    def contains(self, x, tol=1e-9):
        return self.distance(x) <= tol


def z_sets(S):
    out = []
    for j, T in enumerate(S.operators):
        base = S.pair_intersection(j)
        hull = S.pair_hull(j) if (T.lam == 2.0 and T.mu == 2.0) else None
        out.append(ZSet(j, base, hull))
    return out


def cyclic_run(S, x0, n_cycles, stop_tol=0.0, record_z=False, record_shadows=True):
    """Apply ``T_0, ..., T_{l-1}`` cyclically for `n_cycles` cycles.

    Every operator application is recorded. The run stops early when a full
    cycle moves the iterate by less than `stop_tol`.

    Raises
    ------
    NumericalAbort
        If an iterate becomes non-finite.
    """
    x = as_vec(x0, S.dim)
    if n_cycles < 0:
        raise ValueError("n_cycles must be nonnegative")
    ell = S.n_ops
    X = [x]
    ops = []
    marks = [0]
    stopped = False
    for c in range(n_cycles):
        start = x
        for j, T in enumerate(S.operators):
            try:
                with np.errstate(all="ignore"):
                    x = gdr_step(T, x)
            except NonFiniteError:
                x = np.full_like(x, np.nan)
            if not np.all(np.isfinite(x)):
                raise NumericalAbort(f"non-finite iterate at cycle {c + 1}, operator {j} "
                                     f"(step {len(ops) + 1}); last finite point {X[-1].tolist()}")
            X.append(x)
            ops.append(j)
        marks.append(len(X) - 1)
        if stop_tol > 0 and np.linalg.norm(x - start) < stop_tol:
            stopped = c + 1 < n_cycles
            break
    X = np.array(X)
    dists = np.array([[C.distance(p) for C in S.sets] for p in X])
    dC = None
    if S.intersection_hint is not None:
        dC = np.array([S.intersection_hint.distance(p) for p in X])
    zd = None
    if record_z:
        Z = z_sets(S)
        zd = np.array([[z.distance(p) for z in Z] for p in X])
    shadows = np.array([S.sets[0].project(p) for p in X]) if record_shadows else None
    return TrajectoryReport(
        iterates=X,
        ops=np.array(ops, dtype=int),
        cycle_marks=marks,
        set_distances=dists,
        residuals=np.linalg.norm(np.diff(X, axis=0), axis=1),
        n_ops=ell,
        dC=dC,
        z_distances=zd,
        shadows=shadows,
        stopped_early=stopped,
    )


def _graph_input(S_or_m, pairs=None):
    if pairs is None:
        return S_or_m.m, list(S_or_m.pairs)
    return int(S_or_m), [(int(s), int(t)) for s, t in pairs]


def is_connected(S_or_m, pairs=None):
    """Connectivity of the undirected graph on the sets with one edge per pair."""
    m, pairs = _graph_input(S_or_m, pairs)
    adj = {i: set() for i in range(m)}
    for s, t in pairs:
        adj[s].add(t)
        adj[t].add(s)
    seen = {0}
    queue = deque([0])
    while queue:
        i = queue.popleft()
        for k in adj[i] - seen:
            seen.add(k)
            queue.append(k)
    return len(seen) == m


def _reach(adj, start):
    seen = {start}
    queue = deque([start])
    while queue:
        i = queue.popleft()
        for k in adj[i]:
            if k not in seen:
                seen.add(k)
                queue.append(k)
    return seen


def _path(adj, a, b):
    """Shortest directed walk a -> b with at least one edge (BFS)."""
    prev = {}
    queue = deque()
    for k in sorted(adj[a]):
        prev[k] = a
        queue.append(k)
    while queue and b not in prev:
        i = queue.popleft()
        for k in sorted(adj[i]):
            if k not in prev:
                prev[k] = i
                queue.append(k)
    path = [b]
    while True:
        path.append(prev[path[-1]])
        if path[-1] == a:
            return path[::-1]


def fully_connected_witness(S_or_m, pairs=None):
    """Anchor, directed cycle and star certifying the fully connected
    condition, or None.

    The condition asks for an anchor ``i_1``, a closed directed walk
    ``i_1 -> i_2 -> ... -> i_r -> i_1`` and star edges ``i_1 -> k`` that
    together touch every set. Indices may repeat, so the vertices usable on
    the walk are exactly those in the strongly connected component of the
    anchor. Each candidate anchor is tried in turn.

    Returns
    -------
    dict with keys ``anchor``, ``cycle`` (walk without the closing return to
    the anchor) and ``star``.
    """
    m, pairs = _graph_input(S_or_m, pairs)
    if m > MAX_GRAPH_SETS:
        raise UnsupportedSize(f"fully connected search supports at most {MAX_GRAPH_SETS} sets")
    out_adj = {i: set() for i in range(m)}
    in_adj = {i: set() for i in range(m)}
    for s, t in pairs:
        out_adj[s].add(t)
        in_adj[t].add(s)
    for a in range(m):
        comp = _reach(out_adj, a) & _reach(in_adj, a)
        on_cycle = comp if len(comp) > 1 else {a}
        star = set(range(m)) - on_cycle
        if not star <= out_adj[a]:
            continue
        walk = [a]
        for v in sorted(on_cycle - {a}):
            if v in walk:
                continue
            walk += _path(out_adj, walk[-1], v)[1:]
        if len(walk) > 1:
            walk += _path(out_adj, walk[-1], a)[1:-1]
        return {"anchor": a, "cycle": walk, "star": sorted(star)}
    return None


def is_fully_connected(S_or_m, pairs=None):
    return fully_connected_witness(S_or_m, pairs) is not None


@dataclass
class ConsensusReport:
    projections: list
    all_equal: bool
    in_intersection: bool

    def to_dict(self):
        return {
            "projections": [np.asarray(p).tolist() for p in self.projections],
            "all_equal": self.all_equal,
            "in_intersection": self.in_intersection,
        }


def shadow_consensus(S, xbar, tol=1e-9):
    """Project `xbar` onto every set and test whether the shadows agree."""
    xbar = as_vec(xbar, S.dim)
    P = [C.project(xbar) for C in S.sets]
    scale = max(1.0, float(np.max(np.abs(xbar))))
    all_equal = all(np.linalg.norm(p - P[0]) <= tol * scale for p in P[1:])
    in_int = all_equal and all(C.contains(P[0], tol * scale) for C in S.sets)
    return ConsensusReport(P, bool(all_equal), bool(in_int))
