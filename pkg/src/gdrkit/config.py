"""JSON configuration, instance schema and report/CSV output.

Set specs are dicts with a ``type`` key::

    {"type": "halfspace", "normal": [1, 0], "offset": 0}
    {"type": "hyperplane", "normal": [0, 1], "offset": 1}
    {"type": "affine", "anchor": [0, 0, 0], "directions": [[1, 0, 0]]}
    {"type": "affine", "A": [[1, 0, 0]], "b": [0]}
    {"type": "box", "lower": [0, null], "upper": [1, null]}     # null = unbounded
    {"type": "ball", "center": [0, 0], "radius": 1}
    {"type": "sphere", "center": [0, 0], "radius": 1}
    {"type": "points", "points": [[0, 0], [1, 0]]}
    {"type": "polyhedron", "normals": [[1, 0], [0, 1]], "offsets": [0, 0]}
    {"type": "epi_abs", "dim": 2, "axes": [0, 1], "literal": false}

An inline instance is ``{"name", "sets", "pairs", "params", "intersection",
"reference_point", "x0", "analytic"}`` with 0-based set indices.
"""

import csv
import json
import math

import numpy as np

from .catalog import ProblemInstance, get_instance
from .geometry import AffineSubspace
from .sets import AffineSet, Ball, Box, EpiAbs, FinitePoints, Halfspace, Hyperplane, Polyhedron, Sphere

SCHEMA_VERSION = 1

OPERATOR_KINDS = {"dr": (2.0, 2.0, 0.5), "ap": (1.0, 1.0, 1.0)}


class ConfigError(ValueError):
    """Invalid configuration; the CLI maps it to exit code 2."""


def _bound(v, default):
    return default if v is None else float(v)


def set_from_spec(spec):
    try:
        kind = spec["type"].lower()
        if kind == "halfspace":
            return Halfspace(spec["normal"], spec["offset"])
        if kind == "hyperplane":
            return Hyperplane(spec["normal"], spec["offset"])
        if kind == "affine":
            if "A" in spec:
                return AffineSet(AffineSubspace.from_equations(spec["A"], spec["b"]))
            return AffineSet(AffineSubspace.from_spanning(spec["anchor"], spec.get("directions", [])))
        if kind == "box":
            lo = [_bound(v, -math.inf) for v in spec["lower"]]
            hi = [_bound(v, math.inf) for v in spec["upper"]]
            return Box(lo, hi)
        if kind == "ball":
            return Ball(spec["center"], spec["radius"])
        if kind == "sphere":
            return Sphere(spec["center"], spec["radius"])
        if kind == "points":
            return FinitePoints(spec["points"])
        if kind == "polyhedron":
            return Polyhedron(normals=spec["normals"], offsets=spec["offsets"])
        if kind == "epi_abs":
            return EpiAbs(int(spec["dim"]), tuple(spec.get("axes", (0, 1))), bool(spec.get("literal", False)))
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"bad set spec {spec!r}: {exc}") from exc
    raise ConfigError(f"unknown set type {spec.get('type')!r}")


def _num(v):
    return [None if not math.isfinite(t) else float(t) for t in np.asarray(v, dtype=float)]


def set_to_spec(C):
    if isinstance(C, Halfspace):
        return {"type": "halfspace", "normal": _num(C.normal), "offset": C.offset}
    if isinstance(C, Hyperplane):
        return {"type": "hyperplane", "normal": _num(C.normal), "offset": C.offset}
    if isinstance(C, AffineSet):
        return {"type": "affine", "anchor": _num(C.subspace.anchor),
                "directions": [_num(b) for b in C.subspace.basis]}
    if isinstance(C, Box):
        return {"type": "box", "lower": _num(C.lower), "upper": _num(C.upper)}
    if isinstance(C, Ball):
        return {"type": "ball", "center": _num(C.center), "radius": C.radius}
    if isinstance(C, Sphere):
        return {"type": "sphere", "center": _num(C.center), "radius": C.radius}
    if isinstance(C, FinitePoints):
        return {"type": "points", "points": [_num(p) for p in C.points]}
    if isinstance(C, Polyhedron):
        return {"type": "polyhedron", "normals": [_num(n) for n in C.normals], "offsets": _num(C.offsets)}
    if isinstance(C, EpiAbs):
        return {"type": "epi_abs", "dim": C.dim, "axes": list(C.axes), "literal": C.literal}
    raise TypeError(f"cannot serialize {type(C).__name__}")


def parse_params(value, n_pairs):
    """Operator parameters from a name (``"dr"``, ``"ap"``, ``"raar:0.6"``,
    ``"affine_combo:0.5"``), a single triple, or one triple per pair."""
    if isinstance(value, str):
        name, _, arg = value.lower().partition(":")
        if name in OPERATOR_KINDS:
            return [OPERATOR_KINDS[name]] * n_pairs
        try:
            a = float(arg)
        except ValueError:
            raise ConfigError(f"operator {value!r} needs a numeric parameter, e.g. raar:0.6") from None
        if name == "raar":
            return [(2.0, 2.0 * a, 0.5)] * n_pairs
        if name == "affine_combo":
            return [(1.0 + a, 1.0 + a, 1.0 / (1.0 + a))] * n_pairs
        raise ConfigError(f"unknown operator {value!r}")
    arr = np.asarray(value, dtype=float)
    if arr.shape == (3,):
        return [tuple(arr)] * n_pairs
    if arr.ndim == 2 and arr.shape == (n_pairs, 3):
        return [tuple(r) for r in arr]
    raise ConfigError("params must be a name, one triple, or one triple per pair")


def instance_from_dict(d):
    if not isinstance(d, dict):
        raise ConfigError("inline instance must be a JSON object")
    try:
        sets = [set_from_spec(s) for s in d["sets"]]
        pairs = [tuple(int(i) for i in p) for p in d["pairs"]]
    except (KeyError, TypeError) as exc:
        raise ConfigError(f"instance needs 'sets' and 'pairs': {exc}") from exc
    params = parse_params(d.get("params", "dr"), len(pairs))
    hint = set_from_spec(d["intersection"]) if d.get("intersection") else None
    inst = ProblemInstance(
        name=d.get("name", "inline"),
        sets=sets,
        pairs=pairs,
        params=params,
        intersection_hint=hint,
        reference_point=np.asarray(d["reference_point"], dtype=float) if d.get("reference_point") is not None else None,
        x0=np.asarray(d["x0"], dtype=float) if d.get("x0") is not None else None,
        analytic=dict(d.get("analytic", {})),
    )
    try:
        inst.schedule()
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    return inst


def instance_to_dict(inst):
    return {
        "schema_version": SCHEMA_VERSION,
        "name": inst.name,
        "dimension": inst.dim,
        "sets": [set_to_spec(C) for C in inst.sets],
        "pairs": [list(p) for p in inst.pairs],
        "params": [list(p) for p in inst.params],
        "intersection": set_to_spec(inst.intersection_hint) if inst.intersection_hint is not None else None,
        "reference_point": _num(inst.reference_point) if inst.reference_point is not None else None,
        "x0": _num(inst.x0) if inst.x0 is not None else None,
        "analytic": jsonable(inst.analytic),
    }


def load_json(path):
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"malformed JSON in {path}: {exc}") from exc


DEFAULTS = {
    "n_cycles": 200,
    "stop_tol": 0.0,
    "audits": ["quasi_fejer", "quasi_coercive"],
    "samples": 10_000,
    "seed": 0,
    "delta": None,
    "eps": 0.0,
    "margin": 0.05,
    "kappa_mode": "pair",
}


def resolve_run_config(cfg, overrides):
    """Merge a config dict with command-line overrides and build the instance.

    Returns ``(instance, settings)``, where settings holds plain values and
    the resolved starting point.
    """
    cfg = dict(cfg or {})
    version = cfg.get("schema_version", SCHEMA_VERSION)
    if version != SCHEMA_VERSION:
        raise ConfigError(f"unsupported schema_version {version}")
    settings = dict(DEFAULTS)
    for key in DEFAULTS:
        if key in cfg:
            settings[key] = cfg[key]
    for key, val in overrides.items():
        if val is not None:
            settings[key] = val
    spec = overrides.get("instance") or cfg.get("instance")
    if spec is None:
        raise ConfigError("no instance given (use --instance or a config with 'instance')")
    if isinstance(spec, str):
        try:
            inst = get_instance(spec)
        except KeyError as exc:
            raise ConfigError(str(exc)) from exc
    else:
        inst = instance_from_dict(spec)
    if "operator" in cfg or "params" in cfg:
        inst = inst.with_params(parse_params(cfg.get("operator", cfg.get("params")), len(inst.pairs)))
    try:
        settings["n_cycles"] = int(settings["n_cycles"])
        settings["stop_tol"] = float(settings["stop_tol"])
        settings["samples"] = int(settings["samples"])
        settings["seed"] = int(settings["seed"])
        settings["eps"] = float(settings["eps"])
        settings["margin"] = float(settings["margin"])
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad numeric setting: {exc}") from exc
    if settings["n_cycles"] < 1 or settings["samples"] < 1:
        raise ConfigError("cycle and sample counts must be positive")
    if settings["stop_tol"] < 0 or settings["margin"] < 0 or settings["eps"] < 0:
        raise ConfigError("tolerances must be nonnegative")
    if settings["delta"] is not None and not float(settings["delta"]) > 0:
        raise ConfigError("delta must be positive")
    settings["x0"], settings["x0_source"] = _resolve_x0(cfg.get("x0"), inst, settings["seed"])
    if settings["x0"].shape[0] != inst.dim:
        raise ConfigError(f"x0 has dimension {settings['x0'].shape[0]}, instance has {inst.dim}")
    return inst, settings


def _resolve_x0(spec, inst, seed):
    if spec is None:
        if inst.x0 is None:
            raise ConfigError("instance has no default x0; give one in the config")
        return np.asarray(inst.x0, dtype=float), {"kind": "instance_default"}
    if isinstance(spec, dict) and "random" in spec:
        r = spec["random"]
        center = np.asarray(r.get("center", inst.reference_point if inst.reference_point is not None
                                   else np.zeros(inst.dim)), dtype=float)
        radius = float(r.get("radius", 1.0))
        s = int(r.get("seed", seed))
        rng = np.random.default_rng(s)
        g = rng.standard_normal(inst.dim)
        x0 = center + radius * rng.random() ** (1.0 / inst.dim) * g / np.linalg.norm(g)
        return x0, {"kind": "random", "center": center.tolist(), "radius": radius, "seed": s}
    try:
        x0 = np.asarray(spec, dtype=float).ravel()
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad x0: {exc}") from exc
    if not np.all(np.isfinite(x0)):
        raise ConfigError("x0 must be finite")
    return x0, {"kind": "explicit"}


def jsonable(obj):
    """Recursively convert numpy values; non-finite floats become None."""
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return jsonable(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj) if math.isfinite(obj) else None
    return obj


def write_report(path, report):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(jsonable(report), fh, indent=2, sort_keys=True)
        fh.write("\n")


def _fmt(v):
    return format(float(v), ".17g")


def write_trajectory_csv(path, traj):
    """One row per iterate: the starting point (step 0, op 0) and then one row
    per operator application, with 1-based operator numbers."""
    m = traj.set_distances.shape[1]
    n = traj.iterates.shape[1]
    header = ["step", "cycle", "op", "residual", "dC"] + [f"d{i + 1}" for i in range(m)] + [f"x{i + 1}" for i in range(n)]
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for k, x in enumerate(traj.iterates):
            row = [k, traj.cycle_of_step(k), 0 if k == 0 else int(traj.ops[k - 1]) + 1,
                   "" if k == 0 else _fmt(traj.residuals[k - 1]),
                   "" if traj.dC is None else _fmt(traj.dC[k])]
            row += [_fmt(v) for v in traj.set_distances[k]]
            row += [_fmt(v) for v in x]
            w.writerow(row)
