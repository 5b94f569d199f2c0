"""Generalized Douglas-Rachford operators.

``T = (1 - alpha) Id + alpha * P_B^mu P_A^lam`` for a pair of sets (A, B),
with relaxation parameters ``lam, mu`` in ]0, 2] and ``alpha > 0``.
"""

import warnings
from dataclasses import dataclass, field

import numpy as np

from .geometry import as_vec
from .sets import RelaxedProjector, relaxed_project


def beta_hat(lam, mu):
    """``(lam/(2-lam) + mu/(2-mu))^{-1}``, or 0 when either parameter is 2."""
    if lam == 2.0 or mu == 2.0:
        return 0.0
    return 1.0 / (lam / (2.0 - lam) + mu / (2.0 - mu))


def eta(lam, mu, alpha):
    """Contraction factor of T along directions orthogonal to aff(A u B)."""
    return 1.0 - alpha + alpha * (1.0 - lam) * (1.0 - mu)


@dataclass(frozen=True, eq=False)
class GdrOperator:
    """One gDR operator for the ordered pair (A, B).

    Attributes
    ----------
    beta_hat, eta : float
        Derived constants, computed once at construction.
    averaged : bool
        True when ``alpha < 1 + beta_hat``; T is then
        ``alpha / (1 + beta_hat)``-averaged for convex A and B.
    """

    set_a: object
    set_b: object
    lam: float
    mu: float
    alpha: float
    name: str = ""
    beta_hat: float = field(init=False)
    eta: float = field(init=False)

    def __post_init__(self):
        lam, mu, alpha = float(self.lam), float(self.mu), float(self.alpha)
        if not (0.0 < lam <= 2.0 and 0.0 < mu <= 2.0):
            raise ValueError("lambda and mu must lie in ]0, 2]")
        if not alpha > 0.0:
            raise ValueError("alpha must be positive")
        if self.set_a.dim != self.set_b.dim:
            raise ValueError("sets live in different dimensions")
        object.__setattr__(self, "lam", lam)
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "beta_hat", beta_hat(lam, mu))
        object.__setattr__(self, "eta", eta(lam, mu, alpha))

    @property
    def dim(self):
        return self.set_a.dim

    @property
    def params(self):
        return (self.lam, self.mu, self.alpha)

    @property
    def averaged(self):
        return self.alpha < 1.0 + self.beta_hat

    @property
    def convex(self):
        return self.set_a.convex and self.set_b.convex

    def __call__(self, x):
        return gdr_step(self, x)


def gdr_step(T, x):
    x = as_vec(x, T.dim)
    y = relaxed_project(RelaxedProjector(T.set_a, T.lam), x)
    z = relaxed_project(RelaxedProjector(T.set_b, T.mu), y)
    return (1.0 - T.alpha) * x + T.alpha * z


def named_operator(kind, A, B, alpha=None, warn=True):
    """Build one of the classical members of the gDR family.

    Parameters
    ----------
    kind : {"ap", "dr", "raar", "affine_combo"}
        Alternating projections ``(1, 1, 1)``, classical Douglas-Rachford
        ``(2, 2, 1/2)``, RAAR ``(2, 2a, 1/2)`` or the affine combination
        ``(1+a, 1+a, 1/(1+a))``, which needs an affine `B`.
    alpha : float, optional
        The parameter ``a`` of RAAR and the affine combination.
    """
    kind = kind.lower().replace("-", "_")
    if kind in ("ap", "alternating_projections"):
        T = GdrOperator(A, B, 1.0, 1.0, 1.0, name="AP")
    elif kind in ("dr", "classical_dr", "douglas_rachford"):
        T = GdrOperator(A, B, 2.0, 2.0, 0.5, name="DR")
    elif kind == "raar":
        if alpha is None:
            raise ValueError("RAAR needs its parameter alpha")
        T = GdrOperator(A, B, 2.0, 2.0 * alpha, 0.5, name=f"RAAR({alpha:g})")
    elif kind in ("affine_combo", "affinecombo"):
        if alpha is None:
            raise ValueError("AffineCombo needs its parameter alpha")
        if not B.affine:
            raise ValueError("AffineCombo requires B to be an affine set")
        T = GdrOperator(A, B, 1.0 + alpha, 1.0 + alpha, 1.0 / (1.0 + alpha), name=f"AffineCombo({alpha:g})")
    else:
        raise ValueError(f"unknown operator kind {kind!r}")
    if warn and not T.averaged:
        warnings.warn(f"{T.name}: alpha >= 1 + beta_hat, convergence is not guaranteed", stacklevel=2)
    return T


def raar_identity_check(A, B, alpha, x):
    """Distance between the RAAR step and ``(1-a) P_A x + (a/2)(x + R_B R_A x)``."""
    x = as_vec(x, A.dim)
    T = GdrOperator(A, B, 2.0, 2.0 * alpha, 0.5)
    pa = A.project(x)
    ra = 2.0 * pa - x
    rbra = 2.0 * B.project(ra) - ra
    rhs = (1.0 - alpha) * pa + 0.5 * alpha * (x + rbra)
    return float(np.linalg.norm(gdr_step(T, x) - rhs))


def shadow(T, x):
    """The shadow ``P_A x`` of an iterate."""
    return T.set_a.project(x)


@dataclass
class GapAnalysis:
    """Gap vector ``g = b - a`` of a convex pair, with ``a = P_A b`` and
    ``b = P_B a``.

    ``in_E`` and ``in_F`` test membership in ``E = A n (B - g)`` and
    ``F = (A + g) n B``.
    """

    g: np.ndarray
    a: np.ndarray
    b: np.ndarray
    converged: bool
    iterations: int
    tol: float
    set_a: object = None
    set_b: object = None

    def in_E(self, x, tol=None):
        tol = self.tol if tol is None else tol
        return self.set_a.contains(x, tol) and self.set_b.contains(np.asarray(x) + self.g, tol)

    def in_F(self, x, tol=None):
        tol = self.tol if tol is None else tol
        return self.set_b.contains(x, tol) and self.set_a.contains(np.asarray(x) - self.g, tol)


def compute_gap(A, B, tol=1e-12, max_iter=100_000):
    """Gap vector by alternating projections started at ``P_A(0)``.

    Stops when consecutive shadows move less than `tol`. A run that hits
    `max_iter` is returned with ``converged=False``; that usually means the
    gap is not attained.
    """
    if not (A.convex and B.convex):
        raise ValueError("gap analysis needs convex sets")
    a = A.project(np.zeros(A.dim))
    converged = False
    k = 0
    for k in range(1, max_iter + 1):
        a_new = A.project(B.project(a))
        step = np.linalg.norm(a_new - a)
        a = a_new
        if step < tol:
            converged = True
            break
    b = B.project(a)
    return GapAnalysis(g=b - a, a=a, b=b, converged=converged, iterations=k, tol=tol, set_a=A, set_b=B)


@dataclass
class FixedPointReport:
    is_fixed: bool
    residual: float
    classification: dict


def fixed_point_check(T, x, tol=1e-9, gap=None):
    """Test whether `x` is fixed by `T` and, for convex pairs with
    ``min(lam, mu) < 2``, check the structure of convex fixed points.

    The structural claim is that ``P_A x`` lies in ``E = A n (B - g)`` and
    ``x - P_A x = mu / (lam + mu - lam mu) * g``.
    """
    x = as_vec(x, T.dim)
    residual = float(np.linalg.norm(x - gdr_step(T, x)))
    classification = {"checked": False}
    if T.convex and min(T.lam, T.mu) < 2.0:
        if gap is None:
            gap = compute_gap(T.set_a, T.set_b)
        pa = T.set_a.project(x)
        coeff = T.mu / (T.lam + T.mu - T.lam * T.mu)
        shadow_gap = T.set_b.distance(pa + gap.g)
        offset_err = float(np.linalg.norm((x - pa) - coeff * gap.g))
        classification = {
            "checked": True,
            "coefficient": coeff,
            "shadow_in_E": bool(shadow_gap <= tol),
            "shadow_distance": shadow_gap,
            "offset_error": offset_err,
            "offset_matches": bool(offset_err <= tol),
            "gap": gap.g.tolist(),
        }
        classification["passed"] = classification["shadow_in_E"] and classification["offset_matches"]
    return FixedPointReport(residual <= tol, residual, classification)


def averaged_constants(T):
    """``beta_hat`` and the averagedness coefficient ``alpha / (1 + beta_hat)``."""
    if not T.averaged:
        raise ValueError("alpha >= 1 + beta_hat: operator is not averaged")
    return {"beta_hat": T.beta_hat, "averaged_coeff": T.alpha / (1.0 + T.beta_hat)}
