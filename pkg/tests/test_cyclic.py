import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from gdrkit.catalog import anchored_halfspaces, four_set_r3, random_polyhedra, remark_str_lin, two_lines
from gdrkit.cyclic import (
    CyclicSchedule,
    NumericalAbort,
    PairIntersection,
    UnsupportedSize,
    cyclic_run,
    dykstra_project,
    fully_connected_witness,
    is_connected,
    is_fully_connected,
    shadow_consensus,
    z_sets,
)
from gdrkit.diagnostics import fit_linear_rate
from gdrkit.sets import Ball, Halfspace, Hyperplane, Sphere

from .oracles import closed_walk_fully_connected, union_find_connected


def _dr_two_lines_rate(phi):
    """Spectral radius of the linear DR map on two lines through 0.

    Independent oracle: build the 2x2 matrix from reflection matrices and
    take its eigenvalues.
    """
    def refl(theta):
        c, s = np.cos(2 * theta), np.sin(2 * theta)
        return np.array([[c, s], [s, -c]])

    M = 0.5 * (np.eye(2) + refl(phi) @ refl(0.0))
    return max(abs(np.linalg.eigvals(M)))


def test_two_lines_rate_matches_eigen_oracle():
    inst = two_lines(45.0)
    traj = cyclic_run(inst.schedule(), [1.0, 1.0], 200)
    fit = fit_linear_rate(traj.dC)
    assert fit.rate == pytest.approx(_dr_two_lines_rate(np.pi / 4), abs=0.02)
    assert fit.rate == pytest.approx(np.cos(np.pi / 4), abs=0.02)


def test_run_from_a_member_is_constant():
    inst = anchored_halfspaces()
    x0 = np.array([-0.2, -0.3])
    traj = cyclic_run(inst.schedule(), x0, 10)
    assert np.all(traj.iterates == x0)
    assert np.all(traj.residuals == 0.0)


def test_anchored_schedule_converges():
    inst = anchored_halfspaces()
    traj = cyclic_run(inst.schedule(), [3.0, 2.0], 500)
    assert traj.dC[-1] <= 1e-8


def test_trajectory_bookkeeping():
    inst = remark_str_lin()
    S = inst.schedule()
    traj = cyclic_run(S, inst.x0, 7)
    assert traj.n_steps == 21 and len(traj.iterates) == 22
    assert traj.cycle_marks == list(range(0, 22, 3))
    assert traj.ops.tolist() == [0, 1, 2] * 7
    assert traj.set_distances.shape == (22, 3)
    assert traj.cycle_of_step(0) == 0 and traj.cycle_of_step(3) == 1 and traj.cycle_of_step(4) == 2
    assert np.all(traj.residuals >= 0) and np.all(traj.set_distances >= 0)
    assert np.array_equal(traj.per_cycle_dC(), traj.dC[traj.cycle_marks])


def test_early_stop_and_determinism():
    inst = two_lines(60.0)
    S = inst.schedule()
    a = cyclic_run(S, [1.0, 0.0], 1000, stop_tol=1e-9)
    b = cyclic_run(S, [1.0, 0.0], 1000, stop_tol=1e-9)
    assert a.stopped_early and a.n_steps < 1000
    assert np.array_equal(a.iterates, b.iterates)


def test_nonfinite_iterate_aborts():
    class Blowup(Hyperplane):
        def project(self, x):
            return np.asarray(x) * 1e308

    S = CyclicSchedule([Blowup([0.0, 1.0], 0.0), Hyperplane([1.0, 0.0], 0.0)], [(0, 1)], [(1.0, 1.0, 1.0)])
    with pytest.raises(NumericalAbort):
        cyclic_run(S, [10.0, 10.0], 5)


def test_schedule_validation():
    H = [Halfspace([1, 0], 0), Halfspace([0, 1], 0), Halfspace([1, 1], 0)]
    with pytest.raises(ValueError):
        CyclicSchedule(H, [(0, 1)], [(2, 2, 0.5)])  # set 2 uncovered
    with pytest.raises(ValueError):
        CyclicSchedule(H, [(0, 0), (1, 2)], [(2, 2, 0.5)])
    with pytest.raises(ValueError):
        CyclicSchedule(H, [(0, 1), (1, 3)], [(2, 2, 0.5)])
    with pytest.raises(ValueError):
        CyclicSchedule(H, [(0, 1), (1, 2)], [(2, 2, 0.5)] * 3)
    S = CyclicSchedule(H, [(0, 1), (1, 2)], [(2, 2, 0.5)])
    assert S.params == [(2.0, 2.0, 0.5)] * 2


def test_pair_intersection_sources():
    B1, B2 = Ball([0, 0], 1), Ball([1, 0], 1)
    P = PairIntersection([B1, B2])
    x = np.array([0.5, 3.0])
    p = P.project(x)
    # the lens is symmetric about x = 0.5; its top vertex is (0.5, sqrt(3)/2)
    np.testing.assert_allclose(p, [0.5, np.sqrt(3) / 2], atol=1e-8)
    p2 = dykstra_project([B1, B2], x)
    np.testing.assert_allclose(p, p2)
    with pytest.raises(ValueError):
        PairIntersection([Sphere([0, 0], 1), B1])
    hs = PairIntersection([Halfspace([1, 0], 0), Halfspace([0, 1], 0)])
    assert hs.distance([1.0, 1.0]) == pytest.approx(np.sqrt(2))


def test_z_sets_of_four_set_example():
    inst = four_set_r3()
    Z = z_sets(inst.schedule())
    # pair (C1, C2) uses DR, so Z_1 = R_+^2 x R
    assert Z[0].has_complement
    assert Z[0].contains([1.0, 1.0, 5.0])
    assert not Z[0].contains([-1.0, 1.0, 5.0])
    # pair (C3, C4) uses AP, so Z_2 = C3 n C4
    assert not Z[1].has_complement
    assert Z[1].contains([1.0, 1.0, 1.0])
    assert not Z[1].contains([1.0, 1.0, 0.0])


@settings(max_examples=40, deadline=None)
@given(arrays(np.float64, 2, elements=st.floats(-3, 3)))
def test_z_sets_contain_pair_intersections_and_dominate(x):
    inst = anchored_halfspaces()
    S = inst.schedule()
    Z = z_sets(S)
    for j, (s, t) in enumerate(S.pairs):
        p = S.pair_intersection(j).project(x)
        assert Z[j].contains(p)
    # aff of each pair is the whole plane here, so max d_Ci <= max d_Zj
    assert max(C.distance(x) for C in S.sets) <= max(z.distance(x) for z in Z) + 1e-9
    in_all_C = all(C.contains(x) for C in S.sets)
    in_all_Z = all(z.contains(x) for z in Z)
    assert in_all_C == in_all_Z


def test_shadow_consensus_examples():
    inst = four_set_r3()
    S = inst.schedule()
    rep = shadow_consensus(S, [1.0, 1.0, 1.0])
    assert not rep.all_equal and not rep.in_intersection
    a = anchored_halfspaces()
    Sa = a.schedule()
    rep = shadow_consensus(Sa, [-0.1, -0.2])
    assert rep.all_equal and rep.in_intersection
    traj = cyclic_run(Sa, a.x0, 2000, stop_tol=1e-13)
    rep = shadow_consensus(Sa, traj.final)
    assert rep.all_equal and rep.in_intersection


def test_polyhedral_cyclic_run_converges():
    inst = random_polyhedra(3, 3, seed=4)
    traj = cyclic_run(inst.schedule(), inst.x0, 800)
    assert traj.dC[-1] <= 1e-8


# ------------------------------------------------------------------ graphs

def test_graph_examples():
    assert is_connected(3, [(0, 1), (0, 2)])
    assert not is_connected(4, [(0, 1), (2, 3)])
    assert is_connected(3, [(0, 1), (1, 2), (2, 0)])
    assert is_fully_connected(4, [(0, 1), (0, 2), (0, 3)])
    assert is_fully_connected(3, [(0, 1), (1, 2), (2, 0)])
    assert not is_fully_connected(3, [(0, 1), (1, 2)])
    S = anchored_halfspaces().schedule()
    assert is_connected(S) and is_fully_connected(S)


def test_witness_is_valid():
    w = fully_connected_witness(4, [(0, 1), (0, 2), (0, 3)])
    assert w == {"anchor": 0, "cycle": [0], "star": [1, 2, 3]}
    w = fully_connected_witness(3, [(0, 1), (1, 2), (2, 0)])
    assert w["star"] == [] and sorted(w["cycle"]) == [0, 1, 2]


def test_graph_size_limit():
    with pytest.raises(UnsupportedSize):
        is_fully_connected(9, [(i, i + 1) for i in range(8)])


def _check_witness(m, pairs, w):
    E = set(pairs)
    walk = w["cycle"]
    assert walk[0] == w["anchor"]
    if len(walk) > 1:
        for a, b in zip(walk, walk[1:] + walk[:1]):
            assert (a, b) in E
    for k in w["star"]:
        assert (w["anchor"], k) in E
    assert set(walk) | set(w["star"]) == set(range(m))


def test_exhaustive_agreement_with_enumeration_oracle():
    for m in range(1, 5):
        edges = [(i, j) for i in range(m) for j in range(m) if i != j]
        for mask in range(2 ** len(edges)):
            pairs = [e for k, e in enumerate(edges) if mask >> k & 1]
            assert is_connected(m, pairs) == union_find_connected(m, pairs)
            w = fully_connected_witness(m, pairs)
            assert (w is not None) == closed_walk_fully_connected(m, pairs), (m, pairs)
            if w is not None:
                _check_witness(m, pairs, w)


@settings(max_examples=100, deadline=None)
@given(st.integers(5, 8).flatmap(
    lambda m: st.tuples(st.just(m), st.lists(st.tuples(st.integers(0, m - 1), st.integers(0, m - 1))
                                             .filter(lambda e: e[0] != e[1]), max_size=16))))
def test_random_larger_graphs_agree_with_oracle(data):
    m, pairs = data
    w = fully_connected_witness(m, pairs)
    assert (w is not None) == closed_walk_fully_connected(m, pairs)
    assert is_connected(m, pairs) == union_find_connected(m, pairs)
    if w is not None:
        _check_witness(m, pairs, w)
