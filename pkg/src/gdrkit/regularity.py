"""Regularity estimators and the constants behind the predicted rates.

The estimators are Monte Carlo bounds. A sampled supremum (CQ-number,
linear regularity modulus) can only under-estimate the true value, and the
reports say so through ``is_lower_bound``.
"""

from dataclasses import dataclass, field

import numpy as np

from .geometry import as_vec
from .operators import averaged_constants  # noqa: F401  (re-exported)

BLOCK = 1024


@dataclass
class RegularityEstimate:
    kind: str
    value: float
    delta: float
    samples: int
    seed: int
    is_lower_bound: bool = True
    is_upper_bound_witnessed: bool = False
    usable: bool = True
    witness: object = None

    def to_dict(self):
        return {
            "kind": self.kind,
            "value": self.value,
            "delta": self.delta,
            "samples": self.samples,
            "seed": self.seed,
            "is_lower_bound": self.is_lower_bound,
            "is_upper_bound_witnessed": self.is_upper_bound_witnessed,
            "usable": self.usable,
        }


def sample_ball(center, radius, n_samples, seed, subspace=None):
    """Uniform samples from ``B(center, radius)``, optionally within an
    affine subspace through `center`.

    Draws come in fixed blocks, each taking its Gaussian directions before
    its radial uniforms, so the first k samples do not depend on
    `n_samples`: asking for more samples only appends to the list.
    """
    center = as_vec(center)
    n = center.shape[0]
    basis = np.eye(n) if subspace is None else np.asarray(subspace.basis)
    k = basis.shape[0]
    if k == 0:
        return np.tile(center, (n_samples, 1))
    rng = np.random.default_rng(seed)
    out = []
    drawn = 0
    while drawn < n_samples:
        g = rng.standard_normal((BLOCK, k))
        u = rng.random(BLOCK)
        g /= np.linalg.norm(g, axis=1)[:, None]
        out.append(g * (radius * u ** (1.0 / k))[:, None])
        drawn += BLOCK
    Y = np.vstack(out)[:n_samples]
    return center + Y @ basis


def _proximal_normals(C, X, w, delta):
    """Unit proximal normals ``x - P_C x`` at base points ``P_C x`` within
    `delta` of `w`."""
    base, normals = [], []
    for x in X:
        p = C.project(x)
        u = x - p
        nu = np.linalg.norm(u)
        if nu <= 1e-12 * max(1.0, np.linalg.norm(x)):
            continue
        if np.linalg.norm(p - w) > delta:
            continue
        base.append(p)
        normals.append(u / nu)
    n = X.shape[1]
    return np.array(base).reshape(-1, n), np.array(normals).reshape(-1, n)


def _max_cross(U, V, chunk=2048):
    best, arg = -np.inf, None
    for i in range(0, len(U), chunk):
        G = U[i:i + chunk] @ V.T
        k = int(np.argmax(G))
        r, c = divmod(k, G.shape[1])
        if G[r, c] > best:
            best, arg = float(G[r, c]), (i + r, c)
    return best, arg


def estimate_cq_number(A, B, L=None, w=None, delta=1.0, n_samples=10_000, seed=0):
    """Sampled lower bound on the CQ-number of (A, B) relative to `L` at `w`.

    Sample points x in ``B(w, delta) n L``. Each gives a unit proximal
    normal ``u`` of A (from ``x - P_A x``) and the negative of a unit
    proximal normal of B (from ``P_B x - x``); the estimate is the largest
    inner product over all cross pairs.
    """
    if not delta > 0:
        raise ValueError("delta must be positive")
    w = as_vec(w if w is not None else np.zeros(A.dim), A.dim)
    if L is not None and np.linalg.norm(w - L.anchor - L.basis.T @ (L.basis @ (w - L.anchor))) > 1e-9:
        raise ValueError("w must lie in L")
    X = sample_ball(w, delta, n_samples, seed, subspace=None if L is None or L.is_whole_space else L)
    _, U = _proximal_normals(A, X, w, delta)
    _, V = _proximal_normals(B, X, w, delta)
    V = -V
    if len(U) == 0 or len(V) == 0:
        return RegularityEstimate("cq_number", float("nan"), delta, 0, seed, usable=False)
    value, (i, j) = _max_cross(U, V)
    return RegularityEstimate("cq_number", min(1.0, value), delta, n_samples, seed,
                              witness={"u": U[i].tolist(), "v": V[j].tolist()})


def estimate_linreg_modulus(sets, intersection, region_center, region_radius,
                            n_samples=10_000, seed=0):
    """Sampled lower bound on the linear regularity modulus over a ball.

    The estimate is ``max d_C(x) / max_i d_{C_i}(x)`` over uniform samples
    x, where `intersection` supplies ``d_C``. Samples where every
    ``d_{C_i}`` is below 1e-12 are skipped.
    """
    center = as_vec(region_center)
    X = sample_ball(center, region_radius, n_samples, seed)
    best, arg, used = -np.inf, None, 0
    for k, x in enumerate(X):
        dmax = max(C.distance(x) for C in sets)
        if dmax < 1e-12:
            continue
        used += 1
        r = intersection.distance(x) / dmax
        if r > best:
            best, arg = r, k
    if used == 0:
        raise ValueError("every sample was skipped (all points lie in all sets)")
    return RegularityEstimate("linreg_modulus", float(best), float(region_radius), n_samples, seed,
                              witness={"x": X[arg].tolist()})


@dataclass
class EpsDeltaReport:
    holds_on_samples: bool
    worst_ratio: float
    witness: object
    estimate: RegularityEstimate

    def to_dict(self):
        return {"holds_on_samples": self.holds_on_samples, "worst_ratio": self.worst_ratio,
                "witness": self.witness, **self.estimate.to_dict()}


def check_eps_delta_regular(C, w, eps, delta, n_samples=2000, seed=0, tol=1e-9):
    """Look for violations of ``<u, x - y> >= -eps ||u|| ||x - y||``.

    Base points x, y in ``C n B(w, delta)`` and proximal normals u at x come
    from projecting uniform samples of ``B(w, delta)`` onto C.
    """
    w = as_vec(w, C.dim)
    if not C.contains(w, 1e-9):
        raise ValueError("w must lie in C")
    if not delta > 0:
        raise ValueError("delta must be positive")
    Z = sample_ball(w, delta, n_samples, seed)
    P = np.array([C.project(z) for z in Z])
    keep = np.linalg.norm(P - w, axis=1) <= delta
    Z, P = Z[keep], P[keep]
    U = Z - P
    un = np.linalg.norm(U, axis=1)
    has_normal = un > 1e-12
    Xb, Un = P[has_normal], U[has_normal] / un[has_normal][:, None]
    Y = np.unique(P, axis=0)
    if len(Xb) == 0 or len(Y) < 2:
        raise ValueError("degenerate sampling: no normals or fewer than two base points")
    worst, wit = np.inf, None
    for i in range(0, len(Xb), 256):
        D = Xb[i:i + 256, None, :] - Y[None, :, :]
        dn = np.linalg.norm(D, axis=2)
        ok = dn > 1e-12
        R = np.where(ok, np.einsum("kn,kmn->km", Un[i:i + 256], D) / np.where(ok, dn, 1.0), np.inf)
        k = int(np.argmin(R))
        r, c = divmod(k, R.shape[1])
        if R[r, c] < worst:
            worst = float(R[r, c])
            wit = {"x": Xb[i + r].tolist(), "y": Y[c].tolist(), "u": Un[i + r].tolist()}
    holds = worst >= -eps - tol
    est = RegularityEstimate("eps_delta_regularity", float(min(1.0, max(0.0, -worst))), delta,
                             int(len(Z)), seed, is_lower_bound=True, is_upper_bound_witnessed=not holds)
    return EpsDeltaReport(bool(holds), worst, None if holds else wit, est)


def xi_bound(theta, mu):
    """``4 mu^2 (1 - theta^2) / (|1 - mu| + sqrt((1 - mu)^2 + 4 mu (1 - theta^2)))^2``."""
    if not 0.0 <= theta < 1.0:
        raise ValueError("theta must lie in [0, 1[")
    if not 0.0 < mu <= 2.0:
        raise ValueError("mu must lie in ]0, 2]")
    s = 1.0 - theta * theta
    den = abs(1.0 - mu) + np.sqrt((1.0 - mu) ** 2 + 4.0 * mu * s)
    return float(4.0 * mu * mu * s / den ** 2)


@dataclass
class PairConstants:
    gamma: float
    nu: float
    nu_prime: float
    beta: float
    beta_hat: float
    theta: float
    kappa: float
    eps1: float
    eps2: float

    def to_dict(self):
        return dict(self.__dict__)


def pair_constants(T, eps1, eps2, theta, kappa, hull_is_whole=False):
    """Quasi-Fejer and quasi-coercivity constants of one gDR operator.

    Parameters
    ----------
    T : GdrOperator
    eps1, eps2 : float
        Regularity parameters of A (in [0, 1/3]) and B (in [0, 1[).
    theta : float
        CQ-number bound in [0, 1[.
    kappa : float
        Linear regularity modulus used in the coercivity constant.
    hull_is_whole : bool
        Whether aff(A u B) is the whole space; then ``nu' = nu``.
    """
    if not 0.0 <= eps1 <= 1.0 / 3.0:
        raise ValueError("eps1 must lie in [0, 1/3]")
    if not 0.0 <= eps2 < 1.0:
        raise ValueError("eps2 must lie in [0, 1[")
    if not 0.0 <= theta < 1.0:
        raise ValueError("theta must lie in [0, 1[")
    if not kappa > 0.0:
        raise ValueError("kappa must be positive")
    lam, mu, alpha = T.lam, T.mu, T.alpha
    if alpha >= 1.0 + T.beta_hat:
        raise ValueError("alpha >= 1 + beta_hat gives a nonpositive beta")
    gamma = 1.0 - alpha + alpha * (1.0 + lam * eps1 / (1.0 - eps1)) * (1.0 + mu * eps2 / (1.0 - eps2))
    beta = (1.0 - alpha + T.beta_hat) / alpha
    s = 1.0 - theta * theta
    second = 2.0 * mu / (abs(1.0 - mu) + np.sqrt((1.0 - mu) ** 2 + 4.0 * mu * s))
    nu = alpha * np.sqrt(s) / kappa * min(lam, second)
    if (lam == 2.0 and mu == 2.0) or hull_is_whole:
        nu_prime = nu
    else:
        nu_prime = min(nu, alpha * (lam + mu - lam * mu))
    return PairConstants(float(gamma), float(nu), float(nu_prime), float(beta), T.beta_hat,
                         float(theta), float(kappa), float(eps1), float(eps2))


@dataclass
class RateRecord:
    Gamma: float
    rho: float
    rho_per_step: float
    delta0_factor: float
    admissible: bool
    bracket: float

    def to_dict(self):
        return dict(self.__dict__)


def predicted_rate(constants, nu, kappa):
    """Per-cycle rate ``[Gamma^2 - (nu/kappa)^2 / sum(1/beta_j)]_+^(1/2)``.

    `constants` holds one ``(gamma_j, beta_j)`` per operator, as tuples or
    objects with ``gamma`` and ``beta`` attributes. A rate at or above 1 is
    returned as is and flagged ``admissible=False``.
    """
    gb = [(c.gamma, c.beta) if hasattr(c, "gamma") else tuple(c) for c in constants]
    if not gb:
        raise ValueError("need at least one operator")
    gam = np.array([g for g, _ in gb], dtype=float)
    bet = np.array([b for _, b in gb], dtype=float)
    if np.any(gam < 1.0):
        raise ValueError("every gamma must be at least 1")
    if np.any(bet <= 0.0):
        raise ValueError("every beta must be positive")
    if not 0.0 < nu <= 1.0:
        raise ValueError("nu must lie in ]0, 1]")
    if not kappa > 0.0:
        raise ValueError("kappa must be positive")
    Gamma = float(np.sqrt(np.prod(gam)))
    bracket = Gamma ** 2 - (nu / kappa) ** 2 / np.sum(1.0 / bet)
    rho = float(np.sqrt(max(0.0, bracket)))
    ell = len(gb)
    return RateRecord(Gamma, rho, float(rho ** (1.0 / ell)), float(np.sqrt(gam[-1]) / (2.0 * Gamma)),
                      rho < 1.0, float(bracket))


@dataclass
class RatePrediction:
    pairs: list
    kappa: float
    nu: float
    rate: RateRecord
    eps: float
    kappa_mode: str
    provenance: dict = field(default_factory=dict)

    @property
    def rho(self):
        return self.rate.rho

    @property
    def rho_per_step(self):
        return self.rate.rho_per_step

    @property
    def admissible(self):
        return self.rate.admissible

    def to_dict(self):
        return {
            "pairs": [p.to_dict() for p in self.pairs],
            "kappa": self.kappa,
            "nu": self.nu,
            "Gamma": self.rate.Gamma,
            "rho": self.rate.rho,
            "rho_per_step": self.rate.rho_per_step,
            "delta0_factor": self.rate.delta0_factor,
            "admissible": self.rate.admissible,
            "eps": self.eps,
            "kappa_mode": self.kappa_mode,
            "provenance": self.provenance,
        }


def predict_schedule(S, eps, thetas, kappa, pair_kappas=None, kappa_mode="pair", provenance=None):
    """Predicted linear rate of a cyclic gDR schedule.

    Parameters
    ----------
    S : CyclicSchedule
    eps : float
        Common regularity parameter of all sets (0 for convex sets).
    thetas : sequence of float
        CQ-number bound for each pair.
    kappa : float
        Linear regularity modulus of the system ``{Z_j}``.
    pair_kappas : sequence of float, optional
        Modulus of each pair; required for ``kappa_mode="pair"``.
    kappa_mode : {"pair", "global"}
        Which modulus divides the coercivity constant of pair j: the pair's
        own modulus (default) or the global `kappa`.
    """
    if kappa_mode not in ("pair", "global"):
        raise ValueError("kappa_mode must be 'pair' or 'global'")
    if len(thetas) != S.n_ops:
        raise ValueError("need one theta per pair")
    if kappa_mode == "pair":
        if pair_kappas is None or len(pair_kappas) != S.n_ops:
            raise ValueError("pair mode needs one kappa per pair")
        ks = list(pair_kappas)
    else:
        ks = [kappa] * S.n_ops
    consts = []
    for j, T in enumerate(S.operators):
        whole = S.pair_hull(j).is_whole_space
        if thetas[j] >= 1.0:
            # no coercivity: the constants survive with nu_j = 0
            c = pair_constants(T, eps, eps, 0.0, ks[j], hull_is_whole=whole)
            c.theta, c.nu, c.nu_prime = float(thetas[j]), 0.0, 0.0
        else:
            c = pair_constants(T, eps, eps, thetas[j], ks[j], hull_is_whole=whole)
        consts.append(c)
    nu = min(min(c.nu_prime for c in consts), 1.0)
    if nu > 0.0:
        rate = predicted_rate(consts, nu, kappa)
    else:
        Gamma = float(np.sqrt(np.prod([c.gamma for c in consts])))
        rate = RateRecord(Gamma, Gamma, Gamma ** (1.0 / S.n_ops), 0.5 * np.sqrt(consts[-1].gamma) / Gamma,
                          False, Gamma ** 2)
    return RatePrediction(consts, float(kappa), float(nu), rate, float(eps), kappa_mode,
                          dict(provenance or {}))


def hyperplane_kappa(n_a, n_b):
    """Modulus ``sqrt(2 / (1 - |<n_a, n_b>|))`` of two intersecting hyperplanes."""
    n_a = as_vec(n_a) / np.linalg.norm(n_a)
    n_b = as_vec(n_b) / np.linalg.norm(n_b)
    c = abs(float(np.dot(n_a, n_b)))
    if c >= 1.0:
        raise ValueError("parallel normals")
    return float(np.sqrt(2.0 / (1.0 - c)))

