import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from gdrkit.geometry import (
    AffineSubspace,
    affine_hull_of_points,
    as_vec,
    distance_affine,
    gram_schmidt,
    inner,
    orthogonal_complement_projection,
    project_affine,
)

coords = st.floats(-100, 100, allow_nan=False, allow_infinity=False)


def vecs(n):
    return arrays(np.float64, n, elements=coords)


def test_inner_examples():
    assert inner([1, 0], [0, 1]) == 0.0
    assert inner([1, 2], [3, 4]) == 11.0
    x = np.array([3.0, -4.0])
    assert inner(x, x) == pytest.approx(25.0)
    with pytest.raises(ValueError):
        inner([1, 2], [1, 2, 3])


def test_as_vec_rejects_bad_input():
    with pytest.raises(ValueError):
        as_vec([np.nan, 1.0])
    with pytest.raises(ValueError):
        as_vec([[1.0, 2.0]])
    with pytest.raises(ValueError):
        as_vec([1.0, 2.0], dim=3)


def test_project_affine_examples():
    xaxis = AffineSubspace.from_spanning([0, 0], [[1, 0]])
    np.testing.assert_allclose(project_affine(xaxis, [2, 3]), [2, 0])
    np.testing.assert_allclose(project_affine(xaxis, [5, 0]), [5, 0])
    diag = AffineSubspace.from_spanning([0, 0], [[1, 1]])
    # minimizing (2 - t)^2 + t^2 gives t = 1
    np.testing.assert_allclose(project_affine(diag, [2, 0]), [1, 1], atol=1e-15)


def test_orthogonal_complement_examples():
    xaxis = AffineSubspace.from_spanning([0, 0], [[1, 0]])
    np.testing.assert_allclose(orthogonal_complement_projection(xaxis, [2, 3]), [0, 3])
    np.testing.assert_allclose(orthogonal_complement_projection(xaxis, [7, 0]), [0, 0])
    plane = AffineSubspace.from_spanning([0, 0, 0], np.eye(3)[:2])
    np.testing.assert_allclose(orthogonal_complement_projection(plane, [1, 1, 5]), [0, 0, 5])


def test_affine_hull_examples():
    L = affine_hull_of_points([[0, 0], [1, 0]])
    assert L.dim == 1
    assert distance_affine(L, [4, 0]) == 0.0
    assert distance_affine(L, [0, 2]) == pytest.approx(2.0)
    P = affine_hull_of_points([[1, 1]])
    assert P.dim == 0
    np.testing.assert_allclose(P.anchor, [1, 1])
    Q = affine_hull_of_points([[0, 0, 0], [1, 0, 0], [0, 1, 0]])
    assert Q.dim == 2
    np.testing.assert_allclose(project_affine(Q, [3, 4, 5]), [3, 4, 0])
    with pytest.raises(ValueError):
        affine_hull_of_points([])


def test_whole_space_and_equations():
    W = AffineSubspace.whole_space(3)
    assert W.is_whole_space and W.dim == 3
    # x + y + z = 1
    H = AffineSubspace.from_equations([[1, 1, 1]], [1])
    assert H.dim == 2
    p = project_affine(H, [1, 1, 1])
    np.testing.assert_allclose(p, [1 / 3, 1 / 3, 1 / 3])


def test_basis_must_be_orthonormal():
    with pytest.raises(ValueError):
        AffineSubspace(np.zeros(2), np.array([[1.0, 0.0], [1.0, 1.0]]))


def test_gram_schmidt_drops_dependent_rows():
    Q = gram_schmidt(np.array([[1.0, 0, 0], [2.0, 0, 0], [1.0, 1.0, 0]]))
    assert Q.shape == (2, 3)
    np.testing.assert_allclose(Q @ Q.T, np.eye(2), atol=1e-12)


def _random_subspace(data, n):
    k = data.draw(st.integers(0, n))
    anchor = data.draw(vecs(n))
    dirs = data.draw(arrays(np.float64, (k, n), elements=st.floats(-1, 1)))
    return AffineSubspace.from_spanning(anchor, dirs)


@settings(max_examples=60, deadline=None)
@given(st.data())
def test_projection_properties(data):
    n = data.draw(st.integers(1, 5))
    L = _random_subspace(data, n)
    x = data.draw(vecs(n))
    p = project_affine(L, x)
    scale = max(1.0, float(np.max(np.abs(x))), float(np.max(np.abs(L.anchor))))
    # idempotent
    np.testing.assert_allclose(project_affine(L, p), p, atol=1e-12 * scale)
    # residual orthogonal to the directions
    if L.dim:
        assert np.max(np.abs(L.basis @ (x - p))) <= 1e-10 * scale
    # Pythagoras with a point of L
    t = data.draw(arrays(np.float64, L.dim, elements=st.floats(-10, 10)))
    w = L.anchor + L.basis.T @ t if L.dim else L.anchor
    lhs = np.sum((x - w) ** 2)
    rhs = np.sum((p - w) ** 2) + np.sum((x - p) ** 2)
    assert abs(lhs - rhs) <= 1e-10 * max(1.0, lhs)
    # the complement part is the residual
    np.testing.assert_allclose(orthogonal_complement_projection(L, x), x - p, atol=1e-10 * scale)


@settings(max_examples=40, deadline=None)
@given(st.data())
def test_distance_split(data):
    """d(x, z)^2 splits into the part inside L and the part across it."""
    n = data.draw(st.integers(1, 4))
    L = _random_subspace(data, n)
    x, z = data.draw(vecs(n)), data.draw(vecs(n))
    px, pz = project_affine(L, x), project_affine(L, z)
    u, v = x - px, z - pz
    lhs = np.sum((x - z) ** 2)
    rhs = np.sum((px - pz) ** 2) + np.sum((u - v) ** 2)
    assert abs(lhs - rhs) <= 1e-10 * max(1.0, lhs)
