"""Closed sets with exact projectors.

Every set exposes ``project``, ``distance`` and ``contains``. Nonconvex sets
return one deterministic nearest point:

* Sphere at its center: ``center + radius * e_1``.
* FinitePoints at equal distance: the lowest index.
* EpiAbs (literal form) at ``t = 0, s > 0``: the boundary ray with positive t.

Each set also provides ``violation``, a vectorized constraint residual that
vanishes exactly on the set and is computed from the defining inequalities
rather than from the projector. The brute-force oracle uses it for membership.
"""

from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .geometry import (
    AffineSubspace,
    affine_hull_of_points,
    as_vec,
    distance_affine,
    project_affine,
)

MEMBER_TOL = 1e-9
MAX_POLY_CONSTRAINTS = 20


class ProjectableSet:
    """Base class: subclasses implement ``project``, ``violation`` and
    ``spanning_points`` and set ``dim``."""

    convex = True
    affine = False
    polyhedral = False

    def project(self, x):
        raise NotImplementedError

    def distance(self, x):
        x = as_vec(x, self.dim)
        return float(np.linalg.norm(x - self.project(x)))

    def contains(self, x, tol=MEMBER_TOL):
        if tol < 0:
            raise ValueError("tolerance must be nonnegative")
        return self.distance(x) <= tol

    def violation(self, points):
        raise NotImplementedError

    def spanning_points(self):
        """Finite list of points of the set whose affine hull equals aff(C)."""
        raise NotImplementedError

    def affine_hull(self):
        return affine_hull_of_points(self.spanning_points())

    def halfspace_form(self):
        """``(N, b)`` with ``C = {x : N x <= b}``, for polyhedral sets only."""
        raise TypeError(f"{type(self).__name__} has no halfspace description")


def _unit(normal, offset):
    n = as_vec(normal)
    nn = np.linalg.norm(n)
    if nn == 0:
        raise ValueError("normal vector must be nonzero")
    n = n / nn
    n.setflags(write=False)
    return n, float(offset) / nn


def _frozen(v):
    v = np.array(v, dtype=float)
    v.setflags(write=False)
    return v


def _points(points, dim):
    P = np.asarray(points, dtype=float)
    if P.ndim == 1:
        P = P.reshape(1, -1)
    if P.shape[1] != dim:
        raise ValueError(f"dimension mismatch: expected {dim}, got {P.shape[1]}")
    return P


def _basis_points(p, n):
    return [p] + [p + e for e in np.eye(n)]


@dataclass(frozen=True, eq=False)
class AffineSet(ProjectableSet):
    """An affine subspace viewed as a set."""

    subspace: AffineSubspace
    affine = True
    polyhedral = True

    @property
    def dim(self):
        return self.subspace.dim_ambient

    def project(self, x):
        return project_affine(self.subspace, x)

    def distance(self, x):
        return distance_affine(self.subspace, x)

    def violation(self, points):
        P = _points(points, self.dim) - self.subspace.anchor
        B = self.subspace.basis
        return np.linalg.norm(P - (P @ B.T) @ B, axis=1)

    def spanning_points(self):
        a = np.array(self.subspace.anchor)
        return [a] + [a + b for b in self.subspace.basis]

    def affine_hull(self):
        return self.subspace

    def halfspace_form(self):
        a = self.subspace.anchor
        B = self.subspace.basis
        # rows spanning the orthogonal complement
        comp = np.eye(self.dim) - B.T @ B
        u, s, _ = np.linalg.svd(comp)
        N = u[:, s > 0.5].T
        return np.vstack([N, -N]), np.concatenate([N @ a, -(N @ a)])


@dataclass(frozen=True, eq=False)
class Hyperplane(ProjectableSet):
    """``{x : <normal, x> = offset}``; the normal is rescaled to unit length."""

    normal: np.ndarray
    offset: float
    affine = True
    polyhedral = True

    def __post_init__(self):
        n, b = _unit(self.normal, self.offset)
        object.__setattr__(self, "normal", n)
        object.__setattr__(self, "offset", b)

    @property
    def dim(self):
        return self.normal.shape[0]

    def project(self, x):
        x = as_vec(x, self.dim)
        return x - (np.dot(self.normal, x) - self.offset) * self.normal

    def distance(self, x):
        x = as_vec(x, self.dim)
        return abs(float(np.dot(self.normal, x)) - self.offset)

    def violation(self, points):
        return np.abs(_points(points, self.dim) @ self.normal - self.offset)

    def spanning_points(self):
        L = self.affine_hull()
        return [np.array(L.anchor)] + [L.anchor + b for b in L.basis]

    def affine_hull(self):
        return AffineSubspace.from_equations(self.normal[None, :], [self.offset])

    def halfspace_form(self):
        return np.vstack([self.normal, -self.normal]), np.array([self.offset, -self.offset])


@dataclass(frozen=True, eq=False)
class Halfspace(ProjectableSet):
    """``{x : <normal, x> <= offset}``; the normal is rescaled to unit length."""

    normal: np.ndarray
    offset: float
    polyhedral = True

    def __post_init__(self):
        n, b = _unit(self.normal, self.offset)
        object.__setattr__(self, "normal", n)
        object.__setattr__(self, "offset", b)

    @property
    def dim(self):
        return self.normal.shape[0]

    def project(self, x):
        x = as_vec(x, self.dim)
        return x - max(0.0, float(np.dot(self.normal, x)) - self.offset) * self.normal

    def distance(self, x):
        x = as_vec(x, self.dim)
        return max(0.0, float(np.dot(self.normal, x)) - self.offset)

    def violation(self, points):
        return np.maximum(0.0, _points(points, self.dim) @ self.normal - self.offset)

    def spanning_points(self):
        return _basis_points(self.offset * self.normal - self.normal, self.dim)

    def halfspace_form(self):
        return self.normal[None, :].copy(), np.array([self.offset])


@dataclass(frozen=True, eq=False)
class Box(ProjectableSet):
    """Axis-aligned box ``lower <= x <= upper``. Infinite bounds are allowed."""

    lower: np.ndarray
    upper: np.ndarray
    polyhedral = True

    def __post_init__(self):
        lo = np.asarray(self.lower, dtype=float).ravel()
        hi = np.asarray(self.upper, dtype=float).ravel()
        if lo.shape != hi.shape:
            raise ValueError("lower and upper must have the same length")
        if np.any(np.isnan(lo)) or np.any(np.isnan(hi)):
            raise ValueError("bounds must not be NaN")
        if np.any(lo > hi):
            raise ValueError("Box requires lower <= upper componentwise")
        if np.any(lo == np.inf) or np.any(hi == -np.inf):
            raise ValueError("Box would be empty")
        object.__setattr__(self, "lower", _frozen(lo))
        object.__setattr__(self, "upper", _frozen(hi))

    @property
    def dim(self):
        return self.lower.shape[0]

    def project(self, x):
        x = as_vec(x, self.dim)
        return np.clip(x, self.lower, self.upper)

    def violation(self, points):
        P = _points(points, self.dim)
        excess = np.maximum(np.maximum(self.lower - P, P - self.upper), 0.0)
        return np.linalg.norm(excess, axis=1)

    def spanning_points(self):
        p = np.clip(np.zeros(self.dim), self.lower, self.upper)
        pts = [p]
        for k in range(self.dim):
            if self.lower[k] < self.upper[k]:
                q = p.copy()
                q[k] = min(self.upper[k], p[k] + 1.0) if self.upper[k] > p[k] else max(self.lower[k], p[k] - 1.0)
                pts.append(q)
        return pts

    def halfspace_form(self):
        rows, rhs = [], []
        for k in range(self.dim):
            e = np.zeros(self.dim)
            e[k] = 1.0
            if np.isfinite(self.upper[k]):
                rows.append(e)
                rhs.append(self.upper[k])
            if np.isfinite(self.lower[k]):
                rows.append(-e)
                rhs.append(-self.lower[k])
        return np.array(rows).reshape(-1, self.dim), np.array(rhs)


@dataclass(frozen=True, eq=False)
class Ball(ProjectableSet):
    """Closed Euclidean ball."""

    center: np.ndarray
    radius: float

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError("radius must be positive")
        object.__setattr__(self, "center", _frozen(as_vec(self.center)))
        object.__setattr__(self, "radius", float(self.radius))

    @property
    def dim(self):
        return self.center.shape[0]

    def project(self, x):
        x = as_vec(x, self.dim)
        d = x - self.center
        nd = np.linalg.norm(d)
        if nd <= self.radius:
            return x
        return self.center + (self.radius / nd) * d

    def violation(self, points):
        P = _points(points, self.dim)
        return np.maximum(0.0, np.linalg.norm(P - self.center, axis=1) - self.radius)

    def spanning_points(self):
        return _basis_points(np.array(self.center), self.dim)


@dataclass(frozen=True, eq=False)
class Sphere(ProjectableSet):
    """Euclidean sphere; the center projects to ``center + radius * e_1``."""

    center: np.ndarray
    radius: float
    convex = False

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError("radius must be positive")
        object.__setattr__(self, "center", _frozen(as_vec(self.center)))
        object.__setattr__(self, "radius", float(self.radius))

    @property
    def dim(self):
        return self.center.shape[0]

    def project(self, x):
        x = as_vec(x, self.dim)
        d = x - self.center
        nd = np.linalg.norm(d)
        if nd == 0.0:
            e1 = np.zeros(self.dim)
            e1[0] = 1.0
            return self.center + self.radius * e1
        return self.center + (self.radius / nd) * d

    def violation(self, points):
        P = _points(points, self.dim)
        return np.abs(np.linalg.norm(P - self.center, axis=1) - self.radius)

    def spanning_points(self):
        c = np.array(self.center)
        pts = [c + self.radius * e for e in np.eye(self.dim)]
        e1 = np.zeros(self.dim)
        e1[0] = 1.0
        pts.append(c - self.radius * e1)
        return pts


@dataclass(frozen=True, eq=False)
class FinitePoints(ProjectableSet):
    """A finite point cloud; ties go to the lowest index."""

    points: np.ndarray
    convex = False

    def __post_init__(self):
        P = np.asarray(self.points, dtype=float)
        if P.ndim == 1:
            P = P.reshape(1, -1)
        if P.shape[0] == 0:
            raise ValueError("FinitePoints needs at least one point")
        if not np.all(np.isfinite(P)):
            raise ValueError("points must be finite")
        object.__setattr__(self, "points", _frozen(P))
        # a single point is trivially convex
        object.__setattr__(self, "convex", P.shape[0] == 1)

    @property
    def dim(self):
        return self.points.shape[1]

    def project(self, x):
        x = as_vec(x, self.dim)
        d2 = np.sum((self.points - x) ** 2, axis=1)
        return np.array(self.points[int(np.argmin(d2))])

    def violation(self, points):
        P = _points(points, self.dim)
        d2 = np.sum((P[:, None, :] - self.points[None, :, :]) ** 2, axis=2)
        return np.sqrt(np.min(d2, axis=1))

    def spanning_points(self):
        return list(np.array(self.points))


class Polyhedron(ProjectableSet):
    """Nonempty intersection of at most 20 halfspaces ``N x <= b``.

    Projection enumerates active sets. For a candidate subset S of
    constraints with linearly independent normals, the nearest point of the
    face ``{N_S x = b_S}`` is ``x - N_S^T mu`` with ``mu`` solving the Gram
    system. The candidate is the projection as soon as it is feasible and
    ``mu >= 0`` (KKT conditions). Subsets are visited by increasing size;
    if rounding prevents an exact KKT match, the nearest feasible candidate
    over all subsets is returned instead.
    """

    polyhedral = True

    def __init__(self, halfspaces=None, *, normals=None, offsets=None):
        if halfspaces is not None:
            hs = list(halfspaces)
            if not hs:
                raise ValueError("Polyhedron needs at least one halfspace")
            N = np.array([h.normal for h in hs])
            b = np.array([h.offset for h in hs])
        else:
            N = np.atleast_2d(np.asarray(normals, dtype=float))
            b = np.atleast_1d(np.asarray(offsets, dtype=float))
            norms = np.linalg.norm(N, axis=1)
            if np.any(norms == 0):
                raise ValueError("normal vectors must be nonzero")
            N = N / norms[:, None]
            b = b / norms
        if N.shape[0] == 0:
            raise ValueError("Polyhedron needs at least one halfspace")
        if N.shape[0] > MAX_POLY_CONSTRAINTS:
            raise ValueError(f"at most {MAX_POLY_CONSTRAINTS} halfspaces supported")
        if N.shape[0] != b.shape[0]:
            raise ValueError("normals and offsets disagree in count")
        self.normals = _frozen(N)
        self.offsets = _frozen(b)
        self._faces = {}
        self._face_order = None
        if self._nearest(np.zeros(self.dim)) is None:
            raise ValueError("Polyhedron is empty")

    @classmethod
    def from_sets(cls, sets):
        """Polyhedral intersection of sets that have a halfspace form."""
        rows, rhs = zip(*(C.halfspace_form() for C in sets))
        return cls(normals=np.vstack(rows), offsets=np.concatenate(rhs))

    @property
    def dim(self):
        return self.normals.shape[1]

    @property
    def halfspaces(self):
        return [Halfspace(n, b) for n, b in zip(self.normals, self.offsets)]

    def _feas_tol(self, x):
        return 1e-10 * max(1.0, float(np.max(np.abs(x))), float(np.max(np.abs(self.offsets))))

    def _subsets(self):
        if self._face_order is None:
            m, n = self.normals.shape
            order = []
            for k in range(1, min(m, n) + 1):
                for S in combinations(range(m), k):
                    NS = self.normals[list(S)]
                    if np.linalg.matrix_rank(NS, tol=1e-10) == k:
                        order.append(S)
            self._face_order = order
        return self._face_order

    def _face(self, S):
        f = self._faces.get(S)
        if f is None:
            NS = self.normals[list(S)]
            f = (NS, np.linalg.inv(NS @ NS.T), self.offsets[list(S)])
            self._faces[S] = f
        return f

    def _nearest(self, x):
        tol = self._feas_tol(x)
        if np.all(self.normals @ x - self.offsets <= tol):
            return x.copy()
        best, best_d = None, np.inf
        for S in self._subsets():
            NS, Ginv, bS = self._face(S)
            mu = Ginv @ (NS @ x - bS)
            p = x - NS.T @ mu
            if np.any(self.normals @ p - self.offsets > self._feas_tol(p)):
                continue
            if np.all(mu >= -1e-12 * max(1.0, float(np.max(np.abs(mu))))):
                return p
            d = np.linalg.norm(x - p)
            if d < best_d:
                best, best_d = p, d
        return best

    def project(self, x):
        x = as_vec(x, self.dim)
        return self._nearest(x)

    def violation(self, points):
        P = _points(points, self.dim)
        return np.maximum(0.0, np.max(P @ self.normals.T - self.offsets, axis=1))

    def halfspace_form(self):
        return np.array(self.normals), np.array(self.offsets)

    def implicit_equalities(self):
        """Indices of constraints that hold with equality on the whole set.

        Constraint i is implicit when ``min <n_i, x>`` over the polyhedron
        equals ``b_i``; the minimum is found with a linear program.
        """
        from scipy.optimize import linprog

        out = []
        for i, (n, b) in enumerate(zip(self.normals, self.offsets)):
            res = linprog(n, A_ub=self.normals, b_ub=self.offsets,
                          bounds=[(None, None)] * self.dim, method="highs")
            if res.status == 0 and res.fun >= b - 1e-9 * max(1.0, abs(b)):
                out.append(i)
        return out

    def affine_hull(self):
        eq = self.implicit_equalities()
        p = self.project(np.zeros(self.dim))
        if not eq:
            return AffineSubspace.whole_space(self.dim)
        Neq = self.normals[eq]
        return AffineSubspace(p, AffineSubspace.from_equations(Neq, Neq @ p).basis)

    def spanning_points(self):
        L = self.affine_hull()
        return [np.array(L.anchor)] + [L.anchor + b for b in L.basis]


@dataclass(frozen=True, eq=False)
class EpiAbs(ProjectableSet):
    """Epigraph of the absolute value in the coordinate plane ``axes = (i, j)``.

    With ``s = x[i]`` and ``t = x[j]`` the default set is the convex cone
    ``{t >= |s|}``; the other coordinates are free. ``literal=True`` selects
    the nonconvex reading ``{s <= |t|}``, whose projection at ``t = 0, s > 0``
    goes to the ray with positive t.
    """

    dim: int
    axes: tuple = (0, 1)
    literal: bool = False

    def __post_init__(self):
        i, j = self.axes
        if i == j or not (0 <= i < self.dim and 0 <= j < self.dim):
            raise ValueError("axes must be two distinct coordinates")
        object.__setattr__(self, "axes", (int(i), int(j)))
        object.__setattr__(self, "convex", not self.literal)

    def _project_plane(self, s, t):
        if self.literal:
            if s <= abs(t):
                return s, t
            # outside: the open cone s > |t| around the positive s axis
            if t >= 0:
                c = (s + t) / 2.0
                return c, c
            c = (s - t) / 2.0
            return c, -c
        if t >= abs(s):
            return s, t
        if t <= -abs(s):
            return 0.0, 0.0
        if s > 0:
            c = (s + t) / 2.0
            return c, c
        c = (t - s) / 2.0
        return -c, c

    def project(self, x):
        x = as_vec(x, self.dim)
        i, j = self.axes
        p = x.copy()
        p[i], p[j] = self._project_plane(x[i], x[j])
        return p

    def violation(self, points):
        P = _points(points, self.dim)
        s, t = P[:, self.axes[0]], P[:, self.axes[1]]
        if self.literal:
            return np.maximum(0.0, s - np.abs(t)) / np.sqrt(2.0)
        return np.maximum(0.0, np.abs(s) - t) / np.sqrt(2.0)

    def spanning_points(self):
        p = np.zeros(self.dim)
        if not self.literal:
            p[self.axes[1]] = 2.0
        return _basis_points(p, self.dim)


def project(C, x):
    return C.project(x)


def distance(C, x):
    return C.distance(x)


def contains(C, x, tol=MEMBER_TOL):
    return C.contains(x, tol)


@dataclass(frozen=True, eq=False)
class RelaxedProjector:
    """``(1 - lam) Id + lam P_C`` for ``lam`` in ]0, 2]; ``lam = 2`` reflects."""

    set: ProjectableSet
    lam: float

    def __post_init__(self):
        lam = float(self.lam)
        if not 0.0 < lam <= 2.0:
            raise ValueError("relaxation parameter must lie in ]0, 2]")
        object.__setattr__(self, "lam", lam)

    @classmethod
    def identity(cls, C):
        R = object.__new__(cls)
        object.__setattr__(R, "set", C)
        object.__setattr__(R, "lam", 0.0)
        return R

    @classmethod
    def reflector(cls, C):
        return cls(C, 2.0)

    def __call__(self, x):
        return relaxed_project(self, x)


def relaxed_project(R, x):
    x = as_vec(x, R.set.dim)
    if R.lam == 0.0:
        return x.copy()
    return (1.0 - R.lam) * x + R.lam * R.set.project(x)


def polyhedral_intersection(sets):
    """Exact Polyhedron for the intersection of polyhedral sets, else None."""
    if not all(C.polyhedral for C in sets):
        return None
    return Polyhedron.from_sets(sets)


def brute_force_project(C, x, grid_bounds, grid_step, member_tol=None, chunk=200_000):
    """Nearest grid point that satisfies the constraints of `C` up to `grid_step`.

    Testing oracle only. Membership is judged by ``C.violation`` so the
    analytic projector is never consulted.

    Parameters
    ----------
    grid_bounds : pair of array_like
        Lower and upper corners of the search box.
    grid_step : float
        Grid spacing.
    member_tol : float, optional
        Largest admitted violation; defaults to `grid_step`. Sets with
        interior can use 0 so that every candidate is a true member.
    """
    if member_tol is None:
        member_tol = grid_step
    x = as_vec(x, C.dim)
    lo, hi = (np.asarray(b, dtype=float) for b in grid_bounds)
    axes = [np.arange(l, h + grid_step / 2, grid_step) for l, h in zip(lo, hi)]
    sizes = [len(a) for a in axes]
    total = int(np.prod(sizes))
    best, best_d = None, np.inf
    for start in range(0, total, chunk):
        idx = np.unravel_index(np.arange(start, min(total, start + chunk)), sizes)
        P = np.column_stack([a[i] for a, i in zip(axes, idx)])
        ok = C.violation(P) <= member_tol
        if not np.any(ok):
            continue
        P = P[ok]
        d = np.linalg.norm(P - x, axis=1)
        k = int(np.argmin(d))
        if d[k] < best_d:
            best, best_d = P[k], d[k]
    if best is None:
        raise ValueError("no feasible grid point in the given bounds")
    return best
