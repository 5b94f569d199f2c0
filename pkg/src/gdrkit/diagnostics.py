"""Post-processing of trajectories: rate fits and inequality audits."""

from dataclasses import dataclass, field

import numpy as np

DIST_FLOOR = 1e-14
AUDIT_TOL = 1e-9
SKIP_TOL = 1e-12


@dataclass
class RateFit:
    """Least-squares fit of ``log d_n`` against ``n`` on a tail window.

    ``floor_hit`` marks sequences that dropped below the distance floor
    without enough usable entries; the rate is then reported as 0.
    """

    rate: float
    log_intercept: float
    r_squared: float
    window: tuple
    per_cycle: bool
    floor_hit: bool = False

    def to_dict(self):
        return {
            "rate": self.rate,
            "log_intercept": self.log_intercept,
            "r_squared": self.r_squared,
            "window": list(self.window),
            "per_cycle": self.per_cycle,
            "floor_hit": self.floor_hit,
        }


@dataclass
class InequalityAudit:
    kind: str
    params: dict
    worst_slack: float
    violating_index: object
    passed: bool
    nu_hat: object = None
    n_checked: int = 0

    def to_dict(self):
        out = {
            "kind": self.kind,
            "params": self.params,
            "worst_slack": self.worst_slack,
            "violating_index": self.violating_index,
            "passed": self.passed,
            "n_checked": self.n_checked,
        }
        if self.kind == "quasi_coercive":
            out["nu_hat"] = self.nu_hat
        return out


@dataclass
class TrajectoryReport:
    """Everything recorded along one cyclic gDR run.

    Attributes
    ----------
    iterates : ndarray, shape (N + 1, n)
        ``x_0, ..., x_N``, one row per operator application.
    ops : ndarray of int, shape (N,)
        Index j of the operator applied at each step.
    cycle_marks : list of int
        Iterate indices where complete cycles end, starting with 0.
    set_distances : ndarray, shape (N + 1, m)
        ``d_{C_i}(x_n)``.
    dC : ndarray or None
        Distance to the intersection, when a hint was available.
    z_distances : ndarray or None
        Distance to each Z_j, shape (N + 1, l).
    residuals : ndarray, shape (N,)
        ``||x_{n+1} - x_n||``.
    shadows : ndarray or None
        ``P_{C_1} x_n``.
    """

    iterates: np.ndarray
    ops: np.ndarray
    cycle_marks: list
    set_distances: np.ndarray
    residuals: np.ndarray
    n_ops: int
    dC: object = None
    z_distances: object = None
    shadows: object = None
    stopped_early: bool = False
    fitted: object = None
    audits: list = field(default_factory=list)

    @property
    def n_steps(self):
        return len(self.residuals)

    @property
    def final(self):
        return self.iterates[-1]

    def cycle_of_step(self, k):
        """Cycle number (1-based) of step k >= 1; 0 for the initial point."""
        return 0 if k == 0 else (k - 1) // self.n_ops + 1

    def per_cycle_dC(self):
        if self.dC is None:
            raise ValueError("trajectory has no intersection distances")
        return self.dC[self.cycle_marks]


def fit_linear_rate(d, window_fraction=0.5, per_cycle=False, floor=DIST_FLOOR, min_points=5):
    """Fit ``d_n ~ c * rate**n`` on the tail of a distance sequence.

    The sequence is cut at its first entry below `floor` (a convergence
    plateau must not enter the fit), and the last `window_fraction` of what
    remains is fitted.

    Examples
    --------
    >>> round(fit_linear_rate(0.5 ** np.arange(40)).rate, 12)
    0.5
    """
    d = np.asarray(d, dtype=float)
    if not 0 < window_fraction <= 1:
        raise ValueError("window_fraction must lie in ]0, 1]")
    below = np.nonzero(d <= floor)[0]
    cut = int(below[0]) if below.size else len(d)
    start = cut - max(int(np.ceil(window_fraction * cut)), 0)
    idx = np.arange(start, cut)
    if idx.size < min_points:
        if below.size:
            return RateFit(0.0, -np.inf, 1.0, (int(start), int(cut)), per_cycle, floor_hit=True)
        raise ValueError(f"need at least {min_points} usable entries, got {idx.size}")
    y = np.log(d[idx])
    slope, intercept = np.polyfit(idx.astype(float), y, 1)
    resid = y - (slope * idx + intercept)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    ss_res = float(np.sum(resid ** 2))
    r2 = 1.0 if ss_tot <= 1e-300 else max(0.0, 1.0 - ss_res / ss_tot)
    return RateFit(float(np.exp(slope)), float(intercept), r2, (int(start), int(cut)), per_cycle)


def _per_step(value, traj):
    """Broadcast a scalar or a per-operator sequence onto the steps."""
    if np.ndim(value) == 0:
        return np.full(traj.n_steps, float(value))
    value = np.asarray(value, dtype=float)
    if value.shape[0] != traj.n_ops:
        raise ValueError("per-operator constants must have one entry per operator")
    return value[traj.ops]


def audit_quasi_fejer(traj, anchor, gamma, beta, tol=AUDIT_TOL):
    """Check ``||x+ - xbar||^2 + beta ||x - x+||^2 <= gamma ||x - xbar||^2``
    on every step of `traj`.

    `gamma` and `beta` may be scalars or one value per operator. A step
    passes when its slack is at least ``-tol * max(1, ||x - xbar||^2)``.
    """
    X = traj.iterates
    anchor = np.asarray(anchor, dtype=float)
    if anchor.shape != X[0].shape:
        raise ValueError("anchor has the wrong dimension")
    if not np.all(np.isfinite(anchor)):
        raise ValueError("anchor must be finite")
    g = _per_step(gamma, traj)
    b = _per_step(beta, traj)
    before = np.sum((X[:-1] - anchor) ** 2, axis=1)
    after = np.sum((X[1:] - anchor) ** 2, axis=1)
    steps = np.sum((X[:-1] - X[1:]) ** 2, axis=1)
    slack = g * before - after - b * steps
    scaled = slack / np.maximum(1.0, before)
    params = {"gamma": _plain(gamma), "beta": _plain(beta), "anchor": anchor.tolist()}
    return _finish("quasi_fejer", params, slack, scaled, tol)


def _plain(v):
    return float(v) if np.ndim(v) == 0 else [float(t) for t in v]


def _finish(kind, params, slack, scaled, tol, **extra):
    if slack.size == 0:
        return InequalityAudit(kind, params, 0.0, None, True, n_checked=0, **extra)
    k = int(np.argmin(scaled))
    passed = bool(scaled[k] >= -tol)
    return InequalityAudit(kind, params, float(slack[k]), None if passed else k, passed,
                           n_checked=int(slack.size), **extra)


def _distance_fn(target):
    if callable(target) and not hasattr(target, "distance"):
        return target
    return target.distance


def audit_quasi_coercive(traj, target, skip_tol=SKIP_TOL):
    """Estimate ``nu_hat = min ||x - x+|| / d_C(x)`` along the trajectory.

    Steps with ``d_C(x) < skip_tol`` are skipped. The audit passes when the
    estimate is positive, or when every step was skipped because the run
    started inside the target.
    """
    if traj.n_steps == 0:
        raise ValueError("trajectory has no steps")
    dist = _distance_fn(target)
    X = traj.iterates
    d = np.array([dist(x) for x in X[:-1]])
    steps = np.linalg.norm(X[1:] - X[:-1], axis=1)
    use = d >= skip_tol
    if not np.any(use):
        return InequalityAudit("quasi_coercive", {"skip_tol": skip_tol}, 0.0, None, True,
                               nu_hat=None, n_checked=0)
    ratios = np.where(use, steps / np.where(use, d, 1.0), np.inf)
    k = int(np.argmin(ratios))
    nu_hat = float(ratios[k])
    passed = nu_hat > 0.0
    return InequalityAudit("quasi_coercive", {"skip_tol": skip_tol}, nu_hat,
                           None if passed else k, passed, nu_hat=nu_hat, n_checked=int(use.sum()))


def audit_per_cycle_contraction(traj, rho, tol=AUDIT_TOL):
    """Check ``d_C(end of cycle) <= rho * d_C(start of cycle)`` for every cycle."""
    if traj.dC is None:
        raise ValueError("trajectory has no intersection distances")
    marks = traj.cycle_marks
    if len(marks) < 2:
        return InequalityAudit("per_cycle_contraction", {"rho": rho}, 0.0, None, True)
    d = traj.dC[marks]
    slack = rho * d[:-1] - d[1:]
    scaled = slack / np.maximum(1.0, d[:-1])
    return _finish("per_cycle_contraction", {"rho": float(rho)}, slack, scaled, tol)


def fejer_monotone(traj, anchor, tol=1e-10):
    """True when ``||x_n - anchor||`` never increases by more than `tol`."""
    r = np.linalg.norm(traj.iterates - np.asarray(anchor, dtype=float), axis=1)
    return bool(np.all(np.diff(r) <= tol * np.maximum(1.0, r[:-1])))
