"""Order, SSP coefficient, stability function/radii, and error measures.

Everything here is a pure function of tableau arrays.  Order conditions
are evaluated in two equivalent bookkeeping forms:

* per rooted tree, residual ``w @ phi(t) - 1/gamma(t)`` (keys ``t1``,
  ``t2``, ``t31`` .. ``t59``) -- these feed the truncation-error norms;
* per displayed condition in the composite arrangement (keys ``q1``,
  ``q2``, ``q3a``/``q3b``, ``q4a``..``q4d``) -- these decide
  non-defectiveness, since a composite condition can vanish even when no
  individual tree residual does.

The two forms have identical zero sets order by order, which is one of
the property tests.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

__all__ = [
    "TREES",
    "CONDITIONS",
    "order_condition_residuals",
    "tree_residual_vector",
    "classify_order",
    "vacuous_conditions",
    "is_non_defective",
    "NonDefectiveReport",
    "ssp_coefficient",
    "ssp_coefficient_arrays",
    "stability_polynomial",
    "psi_eval",
    "real_axis_inclusion",
    "imag_axis_inclusion",
    "circle_contractivity_radius",
    "absolute_monotonicity_radius",
    "stability_radii",
    "StabilityRadii",
    "ErrorMeasures",
    "error_measures",
    "stability_region_grid",
    "analyze_method",
]

_FEAS_TOL = 1e-10     # componentwise slack in the SSP feasibility conditions
_MOD_SLACK = 1e-12    # |psi| <= 1 + slack in the radius searches
_AM_TOL = -1e-12      # coefficient nonnegativity floor for absolute monotonicity


@dataclass(frozen=True)
class Tree:
    name: str
    order: int
    gamma: int      # density: right-hand side of the tree condition is 1/gamma
    sigma: int      # symmetry order, used only by the weighted residual variant
    phi: callable   # (A, c) -> stage-weight vector


def _t(name, order, gamma, sigma, phi):
    return Tree(name, order, gamma, sigma, phi)


# The nine order-5 trees are the standard rooted trees with densities
# {5,10,20,15,30,20,40,60,120}; they are validated against a fifth-order
# method rather than trusted (see tests).
TREES: tuple[Tree, ...] = (
    _t("t1", 1, 1, 1, lambda A, c: np.ones_like(c)),
    _t("t2", 2, 2, 1, lambda A, c: c),
    _t("t31", 3, 3, 2, lambda A, c: c * c),
    _t("t32", 3, 6, 1, lambda A, c: A @ c),
    _t("t41", 4, 4, 6, lambda A, c: c ** 3),
    _t("t42", 4, 8, 1, lambda A, c: c * (A @ c)),
    _t("t43", 4, 12, 2, lambda A, c: A @ (c * c)),
    _t("t44", 4, 24, 1, lambda A, c: A @ (A @ c)),
    _t("t51", 5, 5, 24, lambda A, c: c ** 4),
    _t("t52", 5, 10, 2, lambda A, c: (c * c) * (A @ c)),
    _t("t53", 5, 20, 2, lambda A, c: (A @ c) ** 2),
    _t("t54", 5, 15, 2, lambda A, c: c * (A @ (c * c))),
    _t("t55", 5, 30, 1, lambda A, c: c * (A @ (A @ c))),
    _t("t56", 5, 20, 6, lambda A, c: A @ (c ** 3)),
    _t("t57", 5, 40, 1, lambda A, c: A @ (c * (A @ c))),
    _t("t58", 5, 60, 2, lambda A, c: A @ (A @ (c * c))),
    _t("t59", 5, 120, 1, lambda A, c: A @ (A @ (A @ c))),
)


@dataclass(frozen=True)
class Condition:
    name: str
    order: int
    rhs: float
    phi: callable   # (A, c) -> functional vector v; the condition is w @ v = rhs


# Composite arrangement of the order conditions through order 4.
CONDITIONS: tuple[Condition, ...] = (
    Condition("q1", 1, 1.0, lambda A, c: np.ones_like(c)),
    Condition("q2", 2, 0.5, lambda A, c: c),
    Condition("q3a", 3, 1 / 3, lambda A, c: c * c),
    Condition("q3b", 3, 0.0, lambda A, c: c * c / 2 - A @ c),
    Condition("q4a", 4, 0.25, lambda A, c: c ** 3),
    Condition("q4b", 4, 0.0, lambda A, c: A @ (c * c / 2 - A @ c)),
    Condition("q4c", 4, 0.0, lambda A, c: c ** 3 / 6 - A @ (c * c) / 2),
    Condition("q4d", 4, 0.0, lambda A, c: c * (c * c / 2 - A @ c)),
)


def _as_arrays(A, w):
    A = np.asarray(A, dtype=float)
    w = np.asarray(w, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1] or len(w) != A.shape[0]:
        raise ValueError("dimension mismatch between A and weight vector")
    return A, w


def order_condition_residuals(A, w, q_max: int = 4) -> dict[str, float]:
    """Residuals of all order conditions with order <= q_max (1..5).

    Returns a flat map holding both bookkeeping forms: tree keys carry
    ``w @ phi(t) - 1/gamma(t)`` and, for orders <= 4, condition keys carry
    the composite forms ``w @ v - rhs``.
    """
    if not 1 <= q_max <= 5:
        raise ValueError("q_max must be between 1 and 5")
    A, w = _as_arrays(A, w)
    c = A.sum(axis=1)
    out = {}
    for t in TREES:
        if t.order <= q_max:
            out[t.name] = float(w @ t.phi(A, c) - 1.0 / t.gamma)
    for q in CONDITIONS:
        if q.order <= q_max:
            out[q.name] = float(w @ q.phi(A, c) - q.rhs)
    return out


def tree_residual_vector(A, w, order: int, weighted: bool = False) -> np.ndarray:
    """Vector of tree residuals of exactly the given order (the tau vector)."""
    A, w = _as_arrays(A, w)
    c = A.sum(axis=1)
    vals = []
    for t in TREES:
        if t.order == order:
            r = w @ t.phi(A, c) - 1.0 / t.gamma
            vals.append(r / t.sigma if weighted else r)
    if not vals:
        raise ValueError(f"no trees tabulated at order {order}")
    return np.array(vals)


def classify_order(A, w, tol: float = 1e-10) -> int:
    """Largest q <= 5 with every residual of order <= q within tol (0 if none)."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    A, w = _as_arrays(A, w)
    c = A.sum(axis=1)
    p = 0
    for q in range(1, 6):
        ok = all(
            abs(w @ t.phi(A, c) - 1.0 / t.gamma) <= tol
            for t in TREES
            if t.order == q
        )
        if not ok:
            break
        p = q
    return p


def _conditions_at(order: int):
    """Condition set deciding non-defectiveness at the given order."""
    comp = [q for q in CONDITIONS if q.order == order]
    if comp:
        return [(q.name, q.phi, q.rhs) for q in comp]
    # order 5 has no displayed composite arrangement; fall back to trees
    return [(t.name, t.phi, 1.0 / t.gamma) for t in TREES if t.order == order]


def vacuous_conditions(A, order: int, tol: float = 1e-10) -> set[str]:
    """Names of order-``order`` conditions implied by the lower-order ones.

    A condition w @ v = rhs is vacuous for this A when v lies in the span
    of the lower-order tree functionals and the corresponding combination
    of their right-hand sides reproduces rhs: every weight vector of order
    ``order - 1`` then satisfies it automatically, so it cannot be
    violated and is exempt from the non-defectiveness requirement.
    """
    A = np.asarray(A, dtype=float)
    c = A.sum(axis=1)
    lower = [(t.phi(A, c), 1.0 / t.gamma) for t in TREES if t.order < order]
    M = np.column_stack([v for v, _ in lower])
    rho = np.array([r for _, r in lower])
    names = set()
    for name, phi, rhs in _conditions_at(order):
        v = phi(A, c)
        x, *_ = np.linalg.lstsq(M, v, rcond=None)
        span_ok = np.max(np.abs(M @ x - v)) <= tol * max(1.0, np.max(np.abs(v)))
        rhs_ok = abs(x @ rho - rhs) <= tol
        if span_ok and rhs_ok:
            names.add(name)
    return names


@dataclass(frozen=True)
class NonDefectiveReport:
    ok: bool
    order: int
    residuals: dict[str, float]
    exempt: frozenset[str]


def is_non_defective(t, exempt=None, tol: float = 1e-10) -> NonDefectiveReport:
    """Check that the embedded weights violate every order-p condition.

    ``p`` is the order of the advancing method.  Conditions named in
    ``exempt`` are skipped; by default the structurally vacuous ones
    (those implied by the lower-order conditions for this A, which no
    weight vector can violate) are exempted automatically.
    """
    if t.b_tilde is None:
        raise ValueError(f"{t.id} has no embedded weights")
    A = t.A
    c = t.c
    if exempt is None:
        exempt = vacuous_conditions(A, t.p, tol)
    exempt = frozenset(exempt)
    residuals = {}
    ok = True
    for name, phi, rhs in _conditions_at(t.p):
        r = float(t.b_tilde @ phi(A, c) - rhs)
        residuals[name] = r
        if name not in exempt and abs(r) <= tol:
            ok = False
    return NonDefectiveReport(ok=ok, order=t.p, residuals=residuals, exempt=exempt)


def ssp_coefficient_arrays(A, w, tol: float = 1e-6, r_max: float | None = None) -> float:
    """SSP coefficient of the method (A, w) by bisection.

    Assembles K = [[A, 0], [w^T, 0]] and finds the supremum of r with
    K (I + rK)^{-1} >= 0 (componentwise slack -1e-10) and
    r K (I + rK)^{-1} e <= e (slack +1e-10).  A singular probe counts as
    infeasible.  Any negative entry in A or w forces the coefficient to 0.
    """
    A, w = _as_arrays(A, w)
    s = len(w)
    if np.min(A) < -_FEAS_TOL or np.min(w) < -_FEAS_TOL:
        return 0.0  # positive SSP coefficient requires nonnegative coefficients
    K = np.zeros((s + 1, s + 1))
    K[:s, :s] = A
    K[s, :s] = w
    eye = np.eye(s + 1)
    ones = np.ones(s + 1)

    def feasible(r: float) -> bool:
        try:
            M = np.linalg.solve((eye + r * K).T, K.T).T  # K (I + rK)^{-1}
        except np.linalg.LinAlgError:
            return False
        if not np.all(np.isfinite(M)):
            return False
        if np.min(M) < -_FEAS_TOL:
            return False
        return np.max(r * (M @ ones)) <= 1.0 + _FEAS_TOL

    if r_max is None:
        r_max = 2.0 * s
    lo, hi = 0.0, r_max
    if feasible(hi):
        return hi
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if feasible(mid):
            lo = mid
        else:
            hi = mid
    return lo


def ssp_coefficient(t, which: str = "advancing", tol: float = 1e-6) -> float:
    """SSP coefficient of a tableau's advancing or embedded weights."""
    if which == "advancing":
        return ssp_coefficient_arrays(t.A, t.b, tol)
    if which == "embedded":
        if t.b_tilde is None:
            raise ValueError(f"{t.id} has no embedded weights")
        return ssp_coefficient_arrays(t.A, t.b_tilde, tol)
    raise ValueError("which must be 'advancing' or 'embedded'")


def stability_polynomial(A, w) -> np.ndarray:
    """Coefficients (ascending) of psi(z) = 1 + sum_k (w^T A^{k-1} e) z^k.

    A is strictly lower triangular, hence nilpotent, so the series is the
    exact polynomial.  Only exactly-zero trailing coefficients are trimmed
    (they arise when the last weights vanish); genuine top coefficients of
    a large method can sit far below roundoff scale, e.g. near 1e-18 at
    sixteen stages, yet still shape the polynomial at radius ten.
    """
    A, w = _as_arrays(A, w)
    s = len(w)
    coeffs = [1.0]
    v = np.ones(s)
    for _ in range(s):
        coeffs.append(float(w @ v))
        v = A @ v
    arr = np.array(coeffs[: s + 1])
    deg = s
    while deg > 0 and arr[deg] == 0.0:
        deg -= 1
    return arr[: deg + 1]


def psi_eval(coeffs, z):
    """Evaluate the polynomial (ascending coefficients) at complex z (Horner)."""
    coeffs = np.asarray(coeffs)
    out = np.zeros_like(np.asarray(z, dtype=complex))
    for a in coeffs[::-1]:
        out = out * z + a
    return out


def _radius_cap(coeffs) -> float:
    return 10.0 * max(1, len(coeffs) - 1)


def _eval_noise(coeffs, z):
    """Pointwise bound on the float rounding error of psi_eval.

    Horner noise scales with sum |a_k| |z|^k, which dwarfs any fixed
    slack once the degree and radius climb (e.g. degree 16 at |z| = 12).
    """
    mags = np.abs(np.asarray(coeffs, dtype=float))
    return 8.0 * np.finfo(float).eps * np.real(psi_eval(mags, np.abs(z)))


def real_axis_inclusion(coeffs, tol: float = 1e-6) -> float:
    """Largest gamma with |psi| <= 1 (+noise slack) on [-gamma, 0]."""
    cap = _radius_cap(coeffs)

    def feasible(g: float) -> bool:
        x = np.linspace(-g, 0.0, 2048)
        return np.all(np.abs(psi_eval(coeffs, x)) <= 1.0 + _MOD_SLACK + _eval_noise(coeffs, x))

    if not feasible(tol):
        return 0.0
    lo, hi = tol, cap
    if feasible(hi):
        return hi
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if feasible(mid):
            lo = mid
        else:
            hi = mid
    return lo


def imag_axis_inclusion(coeffs, tol: float = 1e-6) -> float:
    """Largest gamma with |psi| <= 1 + 1e-12 on [0, i*gamma] (0 if none).

    Near the origin |psi(iy)|^2 - 1 = O(y^k), so sampled feasibility alone
    cannot distinguish a genuine inclusion from slow growth under the
    modulus slack.  The sign of the lowest-order term of
    Q(u) = |psi(i sqrt(u))|^2 - 1 decides that: a positive leading
    coefficient means the modulus exceeds 1 immediately and the radius
    is exactly 0.
    """
    coeffs = np.asarray(coeffs, dtype=float)
    n = len(coeffs)
    # |psi(iy)|^2 as a real polynomial: convolve psi(iy) with its conjugate
    ik = np.array([1j ** k for k in range(n)])
    pos = coeffs * ik
    sq = np.convolve(pos, np.conj(pos)).real  # coefficients in y
    q = sq[::2].copy()                        # odd powers cancel; u = y^2
    q[0] -= 1.0
    scale = max(1.0, np.max(np.abs(q)))
    nz = np.nonzero(np.abs(q) > 1e-13 * scale)[0]
    if len(nz) == 0:
        return _radius_cap(coeffs)  # |psi| == 1 on the whole axis
    if q[nz[0]] > 0:
        return 0.0

    def feasible(g: float) -> bool:
        y = np.linspace(0.0, g, 2048)
        return np.all(
            np.abs(psi_eval(coeffs, 1j * y)) <= 1.0 + _MOD_SLACK + _eval_noise(coeffs, y)
        )

    lo, hi = 0.0, _radius_cap(coeffs)
    if feasible(hi):
        return hi
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if feasible(mid):
            lo = mid
        else:
            hi = mid
    return lo


def circle_contractivity_radius(coeffs, tol: float = 1e-6) -> float:
    """Largest r with |psi| <= 1 + 1e-12 on the circle |z + r| = r.

    The maximum-modulus principle reduces the disk test to its boundary,
    sampled at 4096 points.  A degree-0 polynomial has constant modulus 1
    and returns the search cap.
    """
    coeffs = np.asarray(coeffs, dtype=float)
    cap = _radius_cap(coeffs)
    if len(coeffs) == 1:
        return cap
    theta = np.linspace(0.0, 2.0 * np.pi, 4096, endpoint=False)
    ring = np.exp(1j * theta) - 1.0  # unit circle through 0 centered at -1

    def feasible(r: float) -> bool:
        z = r * ring
        return np.all(np.abs(psi_eval(coeffs, z)) <= 1.0 + _MOD_SLACK + _eval_noise(coeffs, z))

    lo, hi = 0.0, cap
    if feasible(hi):
        return hi
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if feasible(mid):
            lo = mid
        else:
            hi = mid
    return lo


def _taylor_shift(coeffs, x0) -> list:
    """Coefficients of p(x0 + h) in h by repeated synthetic division.

    Exact rationals throughout: the alternating sums cancel catastrophically
    in float64 once the degree climbs past ten or so.
    """
    d = [Fraction(c) for c in coeffs]
    x0 = Fraction(x0)
    n = len(d) - 1
    for i in range(n):
        for j in range(n - 1, i - 1, -1):
            d[j] += x0 * d[j + 1]
    return d


def absolute_monotonicity_radius(coeffs, tol: float = 1e-8) -> float:
    """Largest r with all Taylor coefficients of psi at -r nonnegative.

    The shift itself is exact, so the only uncertainty is the float
    rounding already baked into ``coeffs``; each shifted coefficient is
    floored at minus that rounding amplified through the same recurrence,
    which keeps the search from undershooting a true threshold radius.
    """
    coeffs = np.asarray(coeffs, dtype=float)
    if len(coeffs) == 1:
        return _radius_cap(coeffs)
    eps4 = 4.0 * np.finfo(float).eps

    def feasible(r: float) -> bool:
        d = _taylor_shift(coeffs, -r)
        amp = _taylor_shift(np.abs(coeffs), r)
        return all(dj >= -max(eps4 * float(mj), -_AM_TOL) for dj, mj in zip(d, amp))

    lo, hi = 0.0, _radius_cap(coeffs)
    if not feasible(0.0):
        return 0.0
    if feasible(hi):
        return hi
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if feasible(mid):
            lo = mid
        else:
            hi = mid
    return lo


@dataclass(frozen=True)
class StabilityRadii:
    delta_R: float
    delta_I: float
    delta_C: float
    R_psi: float


def stability_radii(coeffs) -> StabilityRadii:
    return StabilityRadii(
        delta_R=real_axis_inclusion(coeffs),
        delta_I=imag_axis_inclusion(coeffs),
        delta_C=circle_contractivity_radius(coeffs),
        R_psi=absolute_monotonicity_radius(coeffs),
    )


@dataclass(frozen=True)
class ErrorMeasures:
    A2_main: float
    Ainf_main: float
    A2_emb: float
    Ainf_emb: float
    B2: float
    Binf: float
    C2: float
    Cinf: float
    D: float
    convention: str = "plain"   # tree residuals carry no 1/sigma weighting
    literal_b: bool = False


def error_measures(t, weighted: bool = False, literal_b: bool = False) -> ErrorMeasures:
    """Principal error measures of an embedded pair.

    A-measures are norms of the leading truncation-error vectors: order
    p+1 tree residuals for the advancing weights, order p for the
    embedded.  B compares the two leading errors, B2 = A2_main / A2_emb
    (the literal variant divides by the advancing order-p residual norm,
    which vanishes for an exactly order-p method; it is divide-guarded
    and returns inf there).  C measures the gap between the pairs' leading
    errors relative to the embedded one, and D is the largest coefficient
    magnitude in the extended tableau.
    """
    if t.b_tilde is None:
        raise ValueError(f"{t.id} has no embedded weights")
    p = t.p
    if p > 4:
        raise ValueError("error measures need trees to order p+1 <= 5")
    tau_main = tree_residual_vector(t.A, t.b, p + 1, weighted)
    tau_emb_p = tree_residual_vector(t.A, t.b_tilde, p, weighted)
    tau_emb_hi = tree_residual_vector(t.A, t.b_tilde, p + 1, weighted)
    a2, ainf = np.linalg.norm(tau_main), np.max(np.abs(tau_main))
    a2e, ainfe = np.linalg.norm(tau_emb_p), np.max(np.abs(tau_emb_p))

    def ratio(num, den):
        return float(num / den) if den != 0.0 else math.inf

    if literal_b:
        tau_main_p = tree_residual_vector(t.A, t.b, p, weighted)
        b2 = ratio(a2, np.linalg.norm(tau_main_p))
        binf = ratio(ainf, np.max(np.abs(tau_main_p)))
    else:
        b2 = ratio(a2, a2e)
        binf = ratio(ainf, ainfe)
    diff = tau_emb_hi - tau_main
    c2 = ratio(np.linalg.norm(diff), a2e)
    cinf = ratio(np.max(np.abs(diff)), ainfe)
    d = max(np.max(np.abs(t.A)), np.max(np.abs(t.b)), np.max(np.abs(t.b_tilde)), np.max(np.abs(t.c)))
    return ErrorMeasures(
        A2_main=float(a2),
        Ainf_main=float(ainf),
        A2_emb=float(a2e),
        Ainf_emb=float(ainfe),
        B2=b2,
        Binf=binf,
        C2=c2,
        Cinf=cinf,
        D=float(d),
        convention="weighted" if weighted else "plain",
        literal_b=literal_b,
    )


def stability_region_grid(coeffs, re_range=(-12.0, 2.0), im_range=(-8.0, 8.0), nx: int = 201, ny: int = 201):
    """|psi| sampled on a uniform lattice; rows sweep im, columns re.

    Returns (re_vals, im_vals, Z) with Z[j, i] = |psi(re_i + i*im_j)|;
    the |psi| = 1 contour of Z outlines the absolute stability region.
    """
    if nx < 2 or ny < 2:
        raise ValueError("grid needs at least 2 points per axis")
    re = np.linspace(re_range[0], re_range[1], nx)
    im = np.linspace(im_range[0], im_range[1], ny)
    X, Y = np.meshgrid(re, im)
    Z = np.abs(psi_eval(coeffs, X + 1j * Y))
    return re, im, Z


def analyze_method(t) -> dict:
    """Full coefficient report of a pair, as emitted by the analyze command.

    Orders are classified from the coefficients, not read off the catalog
    claims.  Error measures are only defined for advancing order <= 4 and
    require embedded weights; missing entries are None.
    """
    psi = stability_polynomial(t.A, t.b)
    radii = stability_radii(psi)
    p = classify_order(t.A, t.b)
    report = {
        "id": t.id,
        "p": p,
        "p_tilde": None,
        "ssp_main": ssp_coefficient_arrays(t.A, t.b),
        "ssp_embedded": None,
        "delta_R": radii.delta_R,
        "delta_I": radii.delta_I,
        "delta_C": radii.delta_C,
        "R_psi": radii.R_psi,
        "A2": None,
        "Ainf": None,
        "A2_emb": None,
        "Ainf_emb": None,
        "B2": None,
        "Binf": None,
        "C2": None,
        "Cinf": None,
        "D": None,
        "non_defective": None,
    }
    if t.b_tilde is not None:
        report["p_tilde"] = classify_order(t.A, t.b_tilde)
        report["ssp_embedded"] = ssp_coefficient_arrays(t.A, t.b_tilde)
        report["non_defective"] = is_non_defective(t).ok
        if p <= 4:
            em = error_measures(t)
            report.update(
                A2=em.A2_main, Ainf=em.Ainf_main,
                A2_emb=em.A2_emb, Ainf_emb=em.Ainf_emb,
                B2=em.B2, Binf=em.Binf, C2=em.C2, Cinf=em.Cinf, D=em.D,
            )
    return report
