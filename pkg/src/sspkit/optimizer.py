"""Numerical search for embedded weight vectors.

Two facilities: a feasibility screen that tests a candidate weight vector
against the componentwise SSP conditions at a fixed coefficient r, and a
multistart minimax search over the order-condition manifold for weights
minimizing the stability/error cost.

For a fixed stage matrix A every order condition is linear in the weight
vector, so the equality constraints are eliminated exactly: each start is
projected onto the affine solution manifold and the local search runs in
its null-space coordinates.  Only the box constraint 0 <= w <= 1 needs a
penalty.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from . import analysis
from .tableau import EmbeddedTableau

__all__ = [
    "OptimizationSpec",
    "OptimizationResult",
    "ssp_feasible",
    "objective",
    "optimize_embedded",
]

_BOX_PENALTY = 1e6


@dataclass(frozen=True)
class OptimizationSpec:
    """Search configuration; target_order must be one below the advancing order."""

    tableau: EmbeddedTableau
    target_order: int | None = None      # defaults to p - 1
    require_ssp_at: float | None = None  # fixed coefficient for the feasibility screen
    seeds: int = 100
    budget: int = 200_000
    tol_order: float = 1e-10
    seed: int = 0


@dataclass(frozen=True)
class OptimizationResult:
    status: str                     # "ok" or "no-solution"
    w: np.ndarray | None
    objective: float
    residuals: dict[str, float]
    ssp_screen: dict | None         # {"r": r, "feasible": bool} when screening was requested
    non_defective: bool | None
    seed: int
    n_eval: int


def ssp_feasible(A, w, r: float, tol: float = 1e-10) -> bool:
    """Componentwise SSP conditions at fixed coefficient r.

    Builds the bordered matrix K = [[A, 0], [w^T, 0]] and checks
    K (I + rK)^{-1} >= 0 entrywise (slack -tol) together with the induced
    infinity-norm bound ||r K (I + rK)^{-1}||_inf <= 1 + tol.  A singular
    I + rK or a negative weight makes the point infeasible.
    """
    if r < 0:
        raise ValueError("r must be nonnegative")
    A = np.asarray(A, dtype=float)
    w = np.asarray(w, dtype=float)
    if np.min(w) < -tol or np.min(A) < -tol:
        return False
    s = len(w)
    K = np.zeros((s + 1, s + 1))
    K[:s, :s] = A
    K[s, :s] = w
    try:
        M = np.linalg.solve((np.eye(s + 1) + r * K).T, K.T).T
    except np.linalg.LinAlgError:
        return False
    if not np.all(np.isfinite(M)):
        return False
    if np.min(M) < -tol:
        return False
    return np.max(np.sum(np.abs(r * M), axis=1)) <= 1.0 + tol


def _constraint_system(A, p_tilde: int):
    """Rows w^T phi(t) = 1/gamma(t) for every tree of order <= p_tilde."""
    A = np.asarray(A, dtype=float)
    c = A.sum(axis=1)
    rows, rhs = [], []
    for t in analysis.TREES:
        if t.order <= p_tilde:
            rows.append(t.phi(A, c))
            rhs.append(1.0 / t.gamma)
    return np.array(rows), np.array(rhs)


def _f_components(t: EmbeddedTableau) -> np.ndarray:
    em = analysis.error_measures(t)
    return np.array([
        em.A2_emb,
        em.Ainf_emb,
        em.B2 - 1.0,
        em.Binf - 1.0,
        em.C2 - 1.0,
        em.Cinf - 1.0,
    ])


def objective(A, b, w, tol_order: float = 1e-10) -> float:
    """Cost ||F||_inf with F = [A2~, Ainf~, B2-1, Binf-1, C2-1, Cinf-1].

    Returns the +inf sentinel when w misses the order constraints of order
    p-1 (p being the advancing order of (A, b)) beyond tol_order, or when
    the pair is defective so the C ratios diverge.
    """
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    w = np.asarray(w, dtype=float)
    p = analysis.classify_order(A, b)
    if p < 2 or p > 4:
        raise ValueError("objective needs an advancing method of order 2..4")
    M, rhs = _constraint_system(A, p - 1)
    if np.max(np.abs(M @ w - rhs)) > tol_order:
        return math.inf
    t = EmbeddedTableau(id="candidate", A=A, b=b, c=A.sum(axis=1), p=p,
                        b_tilde=w, p_tilde=p - 1)
    f = _f_components(t)
    if not np.all(np.isfinite(f)):
        return math.inf
    return float(np.max(np.abs(f)))


def optimize_embedded(spec: OptimizationSpec) -> OptimizationResult:
    """Multistart Nelder-Mead search for embedded weights.

    Every start draws a random simplex point, projects it onto the affine
    order-condition manifold, and descends on the cost plus a quadratic
    box penalty in the manifold's null-space coordinates.  Candidates are
    kept only if they verify cleanly: order residuals within tol_order
    after clipping to [0, 1], non-defective at order p (with the
    structural exemptions), and passing the SSP screen when
    ``require_ssp_at`` is set.  With no surviving candidate the result is
    an explicit no-solution report.  Runs are deterministic for a fixed
    ``seed``.
    """
    t = spec.tableau
    p = analysis.classify_order(t.A, t.b)
    p_tilde = spec.target_order if spec.target_order is not None else p - 1
    if p_tilde < 1:
        raise ValueError("invalid spec: target_order must be at least 1")
    if p_tilde != p - 1:
        raise ValueError("invalid spec: target_order must equal the advancing order minus 1")
    if p > 4:
        raise ValueError("invalid spec: advancing order above 4 is not supported")

    A, b = t.A, t.b
    s = t.s
    M, rhs = _constraint_system(A, p_tilde)
    w_part, res, *_ = np.linalg.lstsq(M, rhs, rcond=None)
    if np.max(np.abs(M @ w_part - rhs)) > 1e-8:
        # the order conditions themselves are unsatisfiable for this A
        return OptimizationResult("no-solution", None, math.inf, {}, None, None,
                                  spec.seed, 0)
    # null space of the constraint rows
    _, sv, Vt = np.linalg.svd(M)
    tol_sv = max(M.shape) * np.finfo(float).eps * (sv[0] if len(sv) else 1.0)
    rank = int(np.sum(sv > tol_sv))
    N = Vt[rank:].T                     # s x k, orthonormal columns
    k = N.shape[1]

    n_eval = 0

    def cost(y: np.ndarray) -> float:
        nonlocal n_eval
        n_eval += 1
        w = w_part + N @ y
        pen = _BOX_PENALTY * (np.sum(np.minimum(w, 0.0) ** 2)
                              + np.sum(np.maximum(w - 1.0, 0.0) ** 2))
        tt = EmbeddedTableau(id="candidate", A=A, b=b, c=t.c, p=p,
                             b_tilde=w, p_tilde=p_tilde)
        f = _f_components(tt)
        if not np.all(np.isfinite(f)):
            return 1e30 + pen           # defective: keep the landscape finite for the simplex
        return float(np.max(np.abs(f))) + pen

    rng = np.random.default_rng(spec.seed)
    per_start = max(200, spec.budget // max(spec.seeds, 1))
    candidates = []
    for _ in range(spec.seeds):
        if n_eval >= spec.budget:
            break
        x0 = rng.dirichlet(np.ones(s))
        y0 = N.T @ (x0 - w_part)
        best = None
        for _ in range(2):              # one adaptive restart from the found point
            maxfev = min(per_start, spec.budget - n_eval)
            if maxfev <= 0:
                break
            r = minimize(cost, y0, method="Nelder-Mead",
                         options={"maxfev": maxfev, "xatol": 1e-12,
                                  "fatol": 1e-14, "adaptive": True})
            if best is not None and r.fun >= best.fun - 1e-14:
                break
            best, y0 = r, r.x
        if best is None:
            break
        w = np.clip(w_part + N @ best.x, 0.0, 1.0)
        if np.max(np.abs(M @ w - rhs)) > spec.tol_order:
            continue                    # clipping moved it off the manifold: box-infeasible
        obj = objective(A, b, w, spec.tol_order)
        if not math.isfinite(obj):
            continue
        tt = EmbeddedTableau(id="candidate", A=A, b=b, c=t.c, p=p,
                             b_tilde=w, p_tilde=p_tilde)
        if not analysis.is_non_defective(tt).ok:
            continue
        if spec.require_ssp_at is not None and not ssp_feasible(A, w, spec.require_ssp_at):
            continue
        candidates.append((obj, tuple(w), w))

    if not candidates:
        screen = None
        if spec.require_ssp_at is not None:
            screen = {"r": spec.require_ssp_at, "feasible": False}
        return OptimizationResult("no-solution", None, math.inf, {}, screen, None,
                                  spec.seed, n_eval)

    candidates.sort(key=lambda cand: (cand[0], cand[1]))
    obj, _, w = candidates[0]
    residuals = analysis.order_condition_residuals(A, w, min(p, 5))
    screen = None
    if spec.require_ssp_at is not None:
        screen = {"r": spec.require_ssp_at, "feasible": True}
    tt = EmbeddedTableau(id="optimized", A=A, b=b, c=t.c, p=p,
                         b_tilde=w, p_tilde=p_tilde)
    return OptimizationResult(
        status="ok",
        w=w,
        objective=obj,
        residuals=residuals,
        ssp_screen=screen,
        non_defective=analysis.is_non_defective(tt).ok,
        seed=spec.seed,
        n_eval=n_eval,
    )
