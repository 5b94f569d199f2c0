"""Command-line front end.

Subcommands: run, predict, certify, estimate, graph, catalog.

Exit codes: 0 success, 2 configuration error, 3 numerical abort,
4 certification FAIL.
"""

import argparse
import json
import os
import sys

import numpy as np

from .catalog import list_instances
from .config import (
    SCHEMA_VERSION,
    ConfigError,
    jsonable,
    load_json,
    resolve_run_config,
    write_report,
    write_trajectory_csv,
)
from .cyclic import (
    NumericalAbort,
    UnsupportedSize,
    cyclic_run,
    fully_connected_witness,
    is_connected,
    shadow_consensus,
    z_sets,
)
from .diagnostics import (
    audit_per_cycle_contraction,
    audit_quasi_coercive,
    audit_quasi_fejer,
    fit_linear_rate,
)
from .operators import compute_gap
from .regularity import (
    check_eps_delta_regular,
    estimate_cq_number,
    estimate_linreg_modulus,
    predict_schedule,
)

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_FAIL = 0, 2, 3, 4
THETA_ONE = 1.0 - 1e-6


def _settings(args):
    cfg = load_json(args.config) if args.config else {}
    overrides = {
        "instance": args.instance,
        "seed": args.seed,
        "n_cycles": args.cycles,
        "stop_tol": args.tol,
        "samples": args.samples,
        "delta": args.delta,
        "eps": args.eps,
        "margin": args.margin,
    }
    inst, st = resolve_run_config(cfg, overrides)
    st["raw"] = cfg
    return inst, st


def _fit(traj):
    seq = traj.dC if traj.dC is not None else traj.residuals
    try:
        return fit_linear_rate(seq)
    except ValueError:
        return None


def _operator_constants(S):
    out = []
    for (s, t), T in zip(S.pairs, S.operators):
        out.append({"pair": [s, t], "lam": T.lam, "mu": T.mu, "alpha": T.alpha,
                    "beta_hat": T.beta_hat, "eta": T.eta, "averaged": T.averaged})
    return out


def execute_run(inst, st):
    """Run the schedule and the requested audits; returns (traj, report)."""
    S = inst.schedule()
    traj = cyclic_run(S, st["x0"], st["n_cycles"], st["stop_tol"],
                      record_z=bool(st.get("raw", {}).get("record_z", False)))
    traj.fitted = _fit(traj)
    hint = inst.intersection_hint
    skipped = {}
    for name in st["audits"]:
        if name == "quasi_fejer":
            if hint is None or not S.convex or not all(T.averaged for T in S.operators):
                skipped[name] = "needs convex sets, averaged operators and an intersection"
                continue
            anchor = hint.project(traj.final)
            beta = [(1.0 - T.alpha + T.beta_hat) / T.alpha for T in S.operators]
            traj.audits.append(audit_quasi_fejer(traj, anchor, 1.0, beta))
        elif name == "quasi_coercive":
            if hint is None:
                skipped[name] = "needs an intersection"
                continue
            traj.audits.append(audit_quasi_coercive(traj, hint))
        elif name == "per_cycle":
            if hint is None:
                skipped[name] = "needs an intersection"
                continue
            traj.audits.append(audit_per_cycle_contraction(traj, float(st.get("raw", {}).get("rho", 1.0))))
        else:
            raise ConfigError(f"unknown audit {name!r}")
    report = {
        "schema_version": SCHEMA_VERSION,
        "instance": inst.name,
        "x0": st["x0"],
        "x0_source": st["x0_source"],
        "n_cycles": st["n_cycles"],
        "stop_tol": st["stop_tol"],
        "steps": traj.n_steps,
        "stopped_early": traj.stopped_early,
        "final": traj.final,
        "final_dC": None if traj.dC is None else traj.dC[-1],
        "fitted": traj.fitted.to_dict() if traj.fitted else None,
        "fitted_on": "dC" if traj.dC is not None else "residual",
        "audits": [a.to_dict() for a in traj.audits],
        "audits_skipped": skipped,
        "constants": _operator_constants(S),
        "shadow_consensus": shadow_consensus(S, traj.final).to_dict(),
    }
    if hint is None and len(inst.sets) == 2 and S.convex:
        gap = compute_gap(inst.sets[0], inst.sets[1])
        report["gap"] = {"g": gap.g, "converged": gap.converged, "iterations": gap.iterations}
    return traj, report


def _need_delta(st, what):
    if st["delta"] is None:
        raise ConfigError(f"{what} must be sampled; give the estimation radius with --delta")
    return float(st["delta"])


def _reference(inst):
    if inst.reference_point is None:
        raise ConfigError("instance has no reference point w for sampling")
    return np.asarray(inst.reference_point, dtype=float)


def build_prediction(inst, st):
    S = inst.schedule()
    an = inst.analytic
    prov = {}
    if "thetas" in an:
        thetas = [float(t) for t in an["thetas"]]
        prov["theta"] = "analytic"
    else:
        delta = _need_delta(st, "theta")
        w = _reference(inst)
        thetas = []
        for j, (s, t) in enumerate(S.pairs):
            est = estimate_cq_number(S.sets[s], S.sets[t], S.pair_hull(j), w, delta, st["samples"], st["seed"])
            if not est.usable:
                raise ConfigError(f"CQ-number sampling for pair {j} found no proximal normals")
            thetas.append(1.0 if est.value >= THETA_ONE else est.value)
        prov["theta"] = f"sampled lower bound (delta={delta}, samples={st['samples']}, seed={st['seed']})"
    if "pair_kappas" in an:
        pair_kappas = [float(k) for k in an["pair_kappas"]]
        prov["pair_kappas"] = "analytic"
    else:
        delta = _need_delta(st, "pair kappa")
        w = _reference(inst)
        pair_kappas = []
        for j, (s, t) in enumerate(S.pairs):
            est = estimate_linreg_modulus([S.sets[s], S.sets[t]], S.pair_intersection(j), w, delta,
                                          st["samples"], st["seed"])
            pair_kappas.append(max(1.0, est.value))
        prov["pair_kappas"] = f"sampled lower bound (delta={delta})"
    if "kappa" in an:
        kappa = float(an["kappa"])
        prov["kappa"] = "analytic"
    else:
        if inst.intersection_hint is None:
            raise ConfigError("kappa needs an intersection to sample against")
        delta = _need_delta(st, "kappa")
        est = estimate_linreg_modulus(z_sets(S), inst.intersection_hint, _reference(inst), delta,
                                      st["samples"], st["seed"])
        kappa = max(1.0, est.value)
        prov["kappa"] = f"sampled lower bound over the Z-system (delta={delta})"
    prov["kappa_mode"] = ("per-pair modulus in each coercivity constant" if st["kappa_mode"] == "pair"
                          else "global modulus in each coercivity constant")
    try:
        pred = predict_schedule(S, st["eps"], thetas, kappa, pair_kappas, st["kappa_mode"], prov)
    except ValueError as exc:
        raise ConfigError(f"inadmissible parameters: {exc}") from exc
    return pred


def _out_dir(args):
    if args.out:
        os.makedirs(args.out, exist_ok=True)
    return args.out


def cmd_run(args):
    inst, st = _settings(args)
    traj, report = execute_run(inst, st)
    report["command"] = "run"
    out = _out_dir(args) or "."
    write_trajectory_csv(os.path.join(out, "trajectory.csv"), traj)
    write_report(os.path.join(out, "report.json"), report)
    fit = traj.fitted
    print(f"{inst.name}: {traj.n_steps} steps, "
          f"fitted rate {fit.rate:.6g} (r2 {fit.r_squared:.4f})" if fit else f"{inst.name}: {traj.n_steps} steps")
    return EXIT_OK


def cmd_predict(args):
    inst, st = _settings(args)
    pred = build_prediction(inst, st)
    report = {"schema_version": SCHEMA_VERSION, "command": "predict", "instance": inst.name,
              "prediction": pred.to_dict()}
    out = _out_dir(args)
    if out:
        write_report(os.path.join(out, "report.json"), report)
    print(json.dumps(jsonable(report["prediction"]), indent=2, sort_keys=True))
    return EXIT_OK


def certify(inst, st):
    """Run and predict, then compare. Returns the report dict."""
    if inst.intersection_hint is None:
        raise ConfigError("certification needs an intersection to measure d_C")
    pred = build_prediction(inst, st)
    st = dict(st)
    st["audits"] = ["quasi_coercive"]
    traj, run_report = execute_run(inst, st)
    coercive = traj.audits[0]
    reasons = []
    if not pred.admissible:
        reasons.append(f"predicted rate {pred.rho:.6g} is not below 1")
        bad = [j for j, c in enumerate(pred.pairs) if c.theta >= 1.0]
        if bad:
            reasons.append(f"CQ-number reaches 1 for pairs {bad}, so no coercivity constant exists")
        if not coercive.passed:
            reasons.append("the run is not quasi coercive: it stalls at positive distance from the intersection")
        verdict = "NOT-APPLICABLE"
        contraction = None
    else:
        contraction = audit_per_cycle_contraction(traj, pred.rho)
        fit = traj.fitted
        fitted_ok = fit is not None and fit.rate <= pred.rho_per_step + st["margin"]
        if not contraction.passed:
            reasons.append(f"cycle {contraction.violating_index + 1} contracts more slowly than rho")
        if not fitted_ok:
            reasons.append("fitted rate exceeds the predicted per-step rate plus margin"
                           if fit else "no rate could be fitted")
        verdict = "PASS" if contraction.passed and fitted_ok else "FAIL"
    return {
        "schema_version": SCHEMA_VERSION,
        "command": "certify",
        "instance": inst.name,
        "verdict": verdict,
        "reasons": reasons,
        "margin": st["margin"],
        "predicted": pred.to_dict(),
        "empirical": {
            "fitted": run_report["fitted"],
            "per_cycle_contraction": contraction.to_dict() if contraction else None,
            "quasi_coercive": coercive.to_dict(),
            "steps": traj.n_steps,
            "final_dC": run_report["final_dC"],
        },
        "x0": st["x0"],
        "x0_source": st["x0_source"],
    }, traj


def cmd_certify(args):
    inst, st = _settings(args)
    report, traj = certify(inst, st)
    out = _out_dir(args)
    if out:
        write_report(os.path.join(out, "report.json"), report)
        write_trajectory_csv(os.path.join(out, "trajectory.csv"), traj)
    print(f"{inst.name}: {report['verdict']}" + (f" ({'; '.join(report['reasons'])})" if report["reasons"] else ""))
    return EXIT_FAIL if report["verdict"] == "FAIL" else EXIT_OK


def cmd_estimate(args):
    inst, st = _settings(args)
    S = inst.schedule()
    delta = _need_delta(st, "every estimate")
    w = _reference(inst)
    n, seed = st["samples"], st["seed"]
    pairs = []
    for j, (s, t) in enumerate(S.pairs):
        cq = estimate_cq_number(S.sets[s], S.sets[t], S.pair_hull(j), w, delta, n, seed)
        entry = {"pair": [s, t], "cq_number": cq.to_dict()}
        try:
            entry["kappa"] = estimate_linreg_modulus([S.sets[s], S.sets[t]], S.pair_intersection(j), w, delta,
                                                     n, seed).to_dict()
        except ValueError as exc:
            entry["kappa"] = {"error": str(exc)}
        pairs.append(entry)
    report = {"schema_version": SCHEMA_VERSION, "command": "estimate", "instance": inst.name,
              "reference_point": w, "pairs": pairs}
    if inst.intersection_hint is not None:
        report["kappa_system"] = estimate_linreg_modulus(S.sets, inst.intersection_hint, w, delta, n, seed).to_dict()
        report["kappa_z_system"] = estimate_linreg_modulus(z_sets(S), inst.intersection_hint, w, delta,
                                                           n, seed).to_dict()
    regs = []
    for i, C in enumerate(S.sets):
        try:
            r = check_eps_delta_regular(C, w, st["eps"], delta, min(n, 2000), seed)
            regs.append({"set": i, **r.to_dict()})
        except ValueError as exc:
            regs.append({"set": i, "error": str(exc)})
    report["eps_delta"] = regs
    out = _out_dir(args)
    if out:
        write_report(os.path.join(out, "report.json"), report)
    print(json.dumps(jsonable(report), indent=2, sort_keys=True))
    return EXIT_OK


def cmd_graph(args):
    cfg = load_json(args.config) if args.config else {}
    if args.instance is None and "pairs" in cfg and "sets" not in cfg:
        try:
            m, pairs = int(cfg["m"]), [tuple(int(i) for i in p) for p in cfg["pairs"]]
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"graph config needs 'm' and 'pairs': {exc}") from exc
        name = cfg.get("name", "graph")
    else:
        inst, _ = _settings(args)
        m, pairs, name = len(inst.sets), list(inst.pairs), inst.name
    bad = [p for p in pairs if p[0] == p[1] or not (0 <= p[0] < m and 0 <= p[1] < m)]
    if bad:
        raise ConfigError(f"invalid pairs {bad}")
    try:
        witness = fully_connected_witness(m, pairs)
    except UnsupportedSize as exc:
        raise ConfigError(str(exc)) from exc
    report = {"schema_version": SCHEMA_VERSION, "command": "graph", "instance": name, "m": m,
              "pairs": [list(p) for p in pairs], "connected": is_connected(m, pairs),
              "fully_connected": witness is not None, "witness": witness}
    out = _out_dir(args)
    if out:
        write_report(os.path.join(out, "report.json"), report)
    print(json.dumps(jsonable(report), indent=2, sort_keys=True))
    return EXIT_OK


def cmd_catalog(args):
    items = list_instances()
    for it in items:
        print(f"{it['name']:40s} {it['description']}")
    out = _out_dir(args)
    if out:
        write_report(os.path.join(out, "catalog.json"), {"schema_version": SCHEMA_VERSION, "instances": items})
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(prog="gdrkit", description="Generalized Douglas-Rachford experiments.")
    sub = parser.add_subparsers(dest="command", required=True)
    commands = {
        "run": (cmd_run, "run the cyclic algorithm and write trajectory.csv and report.json"),
        "predict": (cmd_predict, "predict the linear rate from regularity constants"),
        "certify": (cmd_certify, "compare a run against the predicted rate"),
        "estimate": (cmd_estimate, "sample CQ-numbers, moduli and (eps, delta)-regularity"),
        "graph": (cmd_graph, "check the connectivity conditions of a pair schedule"),
        "catalog": (cmd_catalog, "list the built-in instances"),
    }
    for name, (fn, help_) in commands.items():
        p = sub.add_parser(name, help=help_)
        p.set_defaults(func=fn)
        p.add_argument("--instance", help="built-in instance name")
        p.add_argument("--config", help="JSON config file")
        p.add_argument("--out", help="output directory")
        p.add_argument("--seed", type=int)
        p.add_argument("--cycles", type=int)
        p.add_argument("--tol", type=float, help="early-stop tolerance on the per-cycle displacement")
        p.add_argument("--samples", type=int)
        p.add_argument("--delta", type=float, help="ball radius for sampled estimates")
        p.add_argument("--eps", type=float, help="regularity parameter epsilon")
        p.add_argument("--margin", type=float, help="certification margin on the fitted rate")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalAbort as exc:
        print(f"numerical abort: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
