"""Euclidean primitives and affine subspaces.

Points are 1-D float64 numpy arrays. Affine subspaces carry an anchor point
and an orthonormal basis of their direction space, so projecting onto them is
a closed formula.
"""

from dataclasses import dataclass

import numpy as np

# rank / drop tolerance for Gram-Schmidt
DROP_TOL = 1e-10
# absolute comparison tolerance, scaled by max(1, magnitude)
CMP_TOL = 1e-12


class NonFiniteError(ValueError):
    """A vector with NaN or infinite entries."""


def as_vec(x, dim=None):
    """Convert `x` to a finite 1-D float array, optionally checking its length."""
    v = np.asarray(x, dtype=float)
    if v.ndim == 0:
        v = v.reshape(1)
    if v.ndim != 1:
        raise ValueError(f"expected a 1-D vector, got shape {v.shape}")
    if dim is not None and v.shape[0] != dim:
        raise ValueError(f"dimension mismatch: expected {dim}, got {v.shape[0]}")
    if not np.all(np.isfinite(v)):
        raise NonFiniteError("vector has non-finite entries")
    return v


def _check_same_dim(x, y):
    if x.shape != y.shape:
        raise ValueError(f"dimension mismatch: {x.shape[0]} vs {y.shape[0]}")


def close(a, b, tol=CMP_TOL):
    """Scaled absolute comparison ``|a - b| <= tol * max(1, |a|, |b|)``."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    scale = max(1.0, float(np.max(np.abs(a), initial=0.0)), float(np.max(np.abs(b), initial=0.0)))
    return bool(np.max(np.abs(a - b), initial=0.0) <= tol * scale)


def inner(x, y):
    """Standard inner product of two vectors of equal length."""
    x = as_vec(x)
    y = as_vec(y)
    _check_same_dim(x, y)
    return float(np.dot(x, y))


def norm(x):
    return float(np.linalg.norm(as_vec(x)))


def gram_schmidt(vectors, tol=DROP_TOL):
    """Orthonormalize the rows of `vectors`, dropping dependent directions.

    Modified Gram-Schmidt with one re-orthogonalization pass. A vector is
    dropped when its remaining norm is below ``tol`` times its original norm
    (or below ``tol`` outright for tiny inputs).

    Returns
    -------
    basis : ndarray, shape (k, n)
    """
    vectors = np.atleast_2d(np.asarray(vectors, dtype=float))
    n = vectors.shape[1]
    basis = []
    for v in vectors:
        w = v.copy()
        scale = max(np.linalg.norm(v), 1.0)
        for _ in range(2):
            for b in basis:
                w -= np.dot(b, w) * b
        nw = np.linalg.norm(w)
        if nw > tol * scale:
            basis.append(w / nw)
    if not basis:
        return np.zeros((0, n))
    return np.array(basis)


@dataclass(frozen=True, eq=False)
class AffineSubspace:
    """Affine subspace ``anchor + span(basis)``.

    Parameters
    ----------
    anchor : array_like, shape (n,)
        Any point of the subspace.
    basis : array_like, shape (k, n)
        Orthonormal rows spanning the direction space. ``k`` may be 0.
    """

    anchor: np.ndarray
    basis: np.ndarray

    def __post_init__(self):
        anchor = as_vec(self.anchor)
        n = anchor.shape[0]
        basis = np.asarray(self.basis, dtype=float)
        if basis.size == 0:
            basis = np.zeros((0, n))
        basis = np.atleast_2d(basis)
        if basis.shape[1] != n:
            raise ValueError("basis vectors must have the anchor's dimension")
        if basis.shape[0] > n:
            raise ValueError("more basis vectors than ambient dimensions")
        gram = basis @ basis.T
        if not np.allclose(gram, np.eye(basis.shape[0]), rtol=0, atol=CMP_TOL * 10):
            raise ValueError("basis is not orthonormal")
        anchor.setflags(write=False)
        basis = basis.copy()
        basis.setflags(write=False)
        object.__setattr__(self, "anchor", anchor)
        object.__setattr__(self, "basis", basis)

    @property
    def dim_ambient(self):
        return self.anchor.shape[0]

    @property
    def dim(self):
        return self.basis.shape[0]

    @property
    def is_whole_space(self):
        return self.dim == self.dim_ambient

    @classmethod
    def whole_space(cls, n):
        return cls(np.zeros(n), np.eye(n))

    @classmethod
    def from_spanning(cls, anchor, directions, tol=DROP_TOL):
        """Build from an anchor and arbitrary (possibly dependent) directions."""
        anchor = as_vec(anchor)
        directions = np.asarray(directions, dtype=float).reshape(-1, anchor.shape[0])
        return cls(anchor, gram_schmidt(directions, tol) if len(directions) else np.zeros((0, anchor.shape[0])))

    @classmethod
    def from_equations(cls, A, b, tol=DROP_TOL):
        """Solution set of ``A x = b``.

        The anchor is the least-norm solution and the basis is an
        orthonormalized kernel basis of `A`.
        """
        A = np.atleast_2d(np.asarray(A, dtype=float))
        b = np.atleast_1d(np.asarray(b, dtype=float))
        n = A.shape[1]
        x0, *_ = np.linalg.lstsq(A, b, rcond=None)
        if np.linalg.norm(A @ x0 - b) > 1e-9 * max(1.0, np.linalg.norm(b)):
            raise ValueError("inconsistent linear equations")
        _, s, vt = np.linalg.svd(A)
        rank = int(np.sum(s > tol * max(1.0, s[0] if s.size else 0.0)))
        kernel = vt[rank:] if rank < n else np.zeros((0, n))
        return cls(x0, gram_schmidt(kernel, tol) if len(kernel) else np.zeros((0, n)))


def project_affine(L, x):
    """Orthogonal projection of `x` onto the affine subspace `L`."""
    x = as_vec(x, L.dim_ambient)
    d = x - L.anchor
    return L.anchor + L.basis.T @ (L.basis @ d)


def orthogonal_complement_projection(L, x):
    """Component of ``x - anchor`` orthogonal to the direction space of `L`.

    This is the direction ``x - P_L x``, i.e. the part of `x` living in
    ``(L - L)^perp``.
    """
    x = as_vec(x, L.dim_ambient)
    d = x - L.anchor
    return d - L.basis.T @ (L.basis @ d)


def distance_affine(L, x):
    return float(np.linalg.norm(orthogonal_complement_projection(L, x)))


def affine_hull_of_points(points, tol=DROP_TOL):
    """Smallest affine subspace containing every point in `points`.

    Examples
    --------
    >>> L = affine_hull_of_points([[0, 0], [1, 0]])
    >>> L.dim
    1
    """
    pts = [as_vec(p) for p in points]
    if not pts:
        raise ValueError("affine hull of an empty point list")
    n = pts[0].shape[0]
    for p in pts:
        if p.shape[0] != n:
            raise ValueError("points have mixed dimensions")
    anchor = pts[0]
    diffs = np.array([p - anchor for p in pts[1:]]).reshape(-1, n)
    if len(diffs) == 0:
        return AffineSubspace(anchor, np.zeros((0, n)))
    return AffineSubspace(anchor, gram_schmidt(diffs, tol))
