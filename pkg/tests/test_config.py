import csv
import io
import json

import numpy as np
import pytest

from gdrkit.catalog import get_instance, list_instances
from gdrkit.config import (
    ConfigError,
    instance_from_dict,
    instance_to_dict,
    jsonable,
    load_json,
    parse_params,
    resolve_run_config,
    set_from_spec,
    set_to_spec,
    write_trajectory_csv,
)
from gdrkit.cyclic import cyclic_run
from gdrkit.sets import AffineSet, Ball, Box, EpiAbs, FinitePoints, Halfspace, Hyperplane, Polyhedron, Sphere
from gdrkit.geometry import AffineSubspace


def test_parse_params_forms():
    assert parse_params("dr", 2) == [(2.0, 2.0, 0.5)] * 2
    assert parse_params("AP", 1) == [(1.0, 1.0, 1.0)]
    assert parse_params("raar:0.6", 1)[0] == pytest.approx((2.0, 1.2, 0.5))
    assert parse_params("affine_combo:0.5", 1)[0] == pytest.approx((1.5, 1.5, 2 / 3))
    assert parse_params([1.5, 1.0, 0.8], 3) == [(1.5, 1.0, 0.8)] * 3
    assert parse_params([[2, 2, 0.5], [1, 1, 1]], 2) == [(2.0, 2.0, 0.5), (1.0, 1.0, 1.0)]
    for bad in ("raar", "nope:1", [1, 2], [[1, 1, 1]] * 3):
        with pytest.raises(ConfigError):
            parse_params(bad, 2)


SETS = [
    Halfspace([1.0, 2.0], 0.5),
    Hyperplane([0.0, 1.0], 1.0),
    AffineSet(AffineSubspace.from_spanning([0.0, 1.0, 0.0], [[1.0, 0.0, 0.0]])),
    Box([0.0, -np.inf], [1.0, 2.0]),
    Ball([1.0, 1.0], 2.0),
    Sphere([0.0, 0.0], 1.5),
    FinitePoints([[0.0, 0.0], [1.0, 2.0]]),
    Polyhedron(normals=[[1.0, 0.0], [0.0, 1.0]], offsets=[0.0, 1.0]),
    EpiAbs(3, axes=(0, 2), literal=True),
]


@pytest.mark.parametrize("C", SETS, ids=lambda C: type(C).__name__)
def test_set_spec_round_trip(C):
    spec = set_to_spec(C)
    D = set_from_spec(json.loads(json.dumps(spec)))
    assert type(D) is type(C)
    rng = np.random.default_rng(0)
    for x in rng.normal(scale=3.0, size=(20, C.dim)):
        np.testing.assert_allclose(D.project(x), C.project(x), atol=1e-12)


def test_set_spec_errors():
    for bad in ({"type": "blob"}, {"type": "ball", "center": [0, 0]}, {"type": "ball", "center": [0, 0], "radius": -1},
                {"normal": [1, 0]}):
        with pytest.raises(ConfigError):
            set_from_spec(bad)
    E = set_from_spec({"type": "affine", "A": [[1, 0, 0]], "b": [2]})
    np.testing.assert_allclose(E.project([0.0, 1.0, 1.0]), [2.0, 1.0, 1.0])


@pytest.mark.parametrize("name", ["two-lines-30deg", "four-set-r3", "anchored-halfspaces", "random-polyhedra-m3-n3-s2"])
def test_instance_round_trip(name):
    inst = get_instance(name)
    d = json.loads(json.dumps(instance_to_dict(inst)))
    back = instance_from_dict(d)
    assert back.pairs == inst.pairs and back.params == pytest.approx(inst.params)
    x = np.asarray(inst.x0)
    a = cyclic_run(inst.schedule(), x, 5)
    b = cyclic_run(back.schedule(), x, 5)
    np.testing.assert_allclose(a.iterates, b.iterates, atol=1e-12)


def test_instance_errors():
    with pytest.raises(ConfigError):
        instance_from_dict([1, 2])
    with pytest.raises(ConfigError):
        instance_from_dict({"sets": []})
    with pytest.raises(ConfigError):
        instance_from_dict({"sets": [{"type": "ball", "center": [0, 0], "radius": 1}] * 2, "pairs": [[0, 0]]})


def test_get_instance_and_catalog():
    with pytest.raises(KeyError):
        get_instance("no-such-thing")
    assert get_instance("two-lines-60deg").analytic["expected_rate"] == pytest.approx(0.5)
    names = [e["name"] for e in list_instances()]
    assert "four-set-r3" in names and "two-lines-<phi>deg" in names


def test_resolve_run_config_x0_kinds():
    inst, st = resolve_run_config({"instance": "two-lines-45deg"}, {})
    assert st["x0_source"] == {"kind": "instance_default"}
    _, st = resolve_run_config({"instance": "two-lines-45deg", "x0": [1, 2]}, {})
    np.testing.assert_array_equal(st["x0"], [1.0, 2.0])
    cfg = {"instance": "two-lines-45deg", "x0": {"random": {"radius": 2.0, "seed": 4}}}
    _, a = resolve_run_config(cfg, {})
    _, b = resolve_run_config(cfg, {})
    np.testing.assert_array_equal(a["x0"], b["x0"])
    assert np.linalg.norm(a["x0"]) <= 2.0
    for bad in ({"instance": "two-lines-45deg", "x0": [1, 2, 3]}, {"instance": "two-lines-45deg", "n_cycles": 0},
                {"instance": "two-lines-45deg", "schema_version": 9}, {}, {"instance": "unknown"}):
        with pytest.raises(ConfigError):
            resolve_run_config(bad, {})
    _, st = resolve_run_config({"instance": "two-lines-45deg", "n_cycles": 5}, {"n_cycles": 9})
    assert st["n_cycles"] == 9


def test_operator_override_in_config():
    inst, _ = resolve_run_config({"instance": "two-lines-45deg", "operator": "ap"}, {})
    assert inst.params == [(1.0, 1.0, 1.0)]


def test_load_json_errors(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text("{not json")
    with pytest.raises(ConfigError):
        load_json(p)
    with pytest.raises(ConfigError):
        load_json(tmp_path / "missing.json")


def test_jsonable():
    out = jsonable({"a": np.array([1.0, np.inf]), "b": np.int64(3), "c": (np.bool_(True), np.nan)})
    assert out == {"a": [1.0, None], "b": 3, "c": [True, None]}
    json.dumps(out, allow_nan=False)


def test_trajectory_csv(tmp_path):
    inst = get_instance("remark-str-lin")
    traj = cyclic_run(inst.schedule(), inst.x0, 3)
    p1, p2 = tmp_path / "a.csv", tmp_path / "b.csv"
    write_trajectory_csv(p1, traj)
    write_trajectory_csv(p2, cyclic_run(inst.schedule(), inst.x0, 3))
    assert p1.read_bytes() == p2.read_bytes()
    rows = list(csv.reader(io.StringIO(p1.read_text())))
    assert rows[0] == ["step", "cycle", "op", "residual", "dC", "d1", "d2", "d3", "x1", "x2"]
    assert len(rows) == 1 + traj.n_steps + 1
    assert [r[2] for r in rows[1:5]] == ["0", "1", "2", "3"]
    np.testing.assert_allclose([float(v) for v in rows[-1][-2:]], traj.final, rtol=0, atol=0)
