"""Butcher tableaus for embedded explicit Runge-Kutta pairs.

The catalog collects optimal strong-stability-preserving (SSP) explicit
methods of orders 2, 3 and 4 together with embedded weight vectors one
order lower, plus two classical non-SSP pairs for comparison.  All
coefficients are assembled from exact rationals and converted to float
once, so structural identities (row sums, weight sums) hold to roundoff.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

__all__ = [
    "EmbeddedTableau",
    "MethodId",
    "parse_method_id",
    "format_method_id",
    "resolve",
    "catalog_ids",
    "ssp_catalog_ids",
    "ssperk_s2",
    "ssperk_n2_3",
    "ssperk_3_3",
    "ssperk_10_4",
    "literature_pair",
    "validate",
    "with_advancing_weights",
    "to_json_dict",
]

_ATOL = 1e-13  # structural validation tolerance


@dataclass(frozen=True)
class EmbeddedTableau:
    """Explicit RK pair (A, b, b_tilde) with abscissae c = A e.

    The advancing weights ``b`` give a method of order ``p``; the optional
    embedded weights ``b_tilde`` share the stage coefficients A and have
    order ``p_tilde`` (one lower for every catalog pair).  Steps are
    advanced with ``b`` and the difference between the two stage
    combinations drives the error estimate (local extrapolation).
    ``ssp_claimed`` records the known SSP coefficient of the advancing
    method, or None where no SSP property is claimed.
    """

    id: str
    A: np.ndarray
    b: np.ndarray
    c: np.ndarray
    p: int
    b_tilde: np.ndarray | None = None
    p_tilde: int | None = None
    ssp_claimed: float | None = None

    def __post_init__(self):
        for name in ("A", "b", "c"):
            arr = np.asarray(getattr(self, name), dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        if self.b_tilde is not None:
            bt = np.asarray(self.b_tilde, dtype=float)
            bt.setflags(write=False)
            object.__setattr__(self, "b_tilde", bt)

    @property
    def s(self) -> int:
        return len(self.b)

    @property
    def has_embedded(self) -> bool:
        return self.b_tilde is not None


@dataclass(frozen=True)
class MethodId:
    """Parsed method identifier.

    ``family`` is ``ssp2``/``ssp3``/``ssp4`` (keyed by the order of the
    advancing method) or ``literature``; ``variant`` selects the embedded
    weights: ``b1``..``b8`` for cataloged vectors, ``w`` for weights
    produced by the numerical optimizer, ``none`` for no selection.
    """

    family: str
    s: int
    variant: str = "none"


_ID_RE = re.compile(r"^ssp(\d+),(\d+)(?:-(b\d+|w))?$")


def parse_method_id(text: str) -> MethodId:
    """Parse ``ssp<s>,<p>[-b<k>|-w]``, ``bs32`` or ``dp54`` (case-insensitive)."""
    t = text.strip().lower()
    if t == "bs32":
        return MethodId("literature", 4, "none")
    if t == "dp54":
        return MethodId("literature", 7, "none")
    m = _ID_RE.match(t)
    if not m:
        raise ValueError(f"unrecognized method id: {text!r}")
    s, p = int(m.group(1)), int(m.group(2))
    if p not in (2, 3, 4):
        raise ValueError(f"unsupported order in method id: {text!r}")
    variant = m.group(3) or "none"
    return MethodId(f"ssp{p}", s, variant)


def format_method_id(mid: MethodId) -> str:
    """Canonical lower-case text form; inverse of parse_method_id."""
    if mid.family == "literature":
        return {4: "bs32", 7: "dp54"}[mid.s]
    p = int(mid.family[3:])
    base = f"ssp{mid.s},{p}"
    return base if mid.variant == "none" else f"{base}-{mid.variant}"


def _fvec(vals) -> np.ndarray:
    return np.array([float(Fraction(v)) for v in vals])


def _tableau(mid, A, b, p, bt=None, pt=None, ssp=None) -> EmbeddedTableau:
    A = np.array([[float(x) for x in row] for row in A])
    return EmbeddedTableau(
        id=format_method_id(mid),
        A=A,
        b=_fvec(b),
        c=A.sum(axis=1),
        p=p,
        b_tilde=None if bt is None else _fvec(bt),
        p_tilde=pt,
        ssp_claimed=ssp,
    )


def ssperk_s2(s: int, variant: str = "none") -> EmbeddedTableau:
    """Optimal second-order SSP method with s stages, SSP coefficient s-1.

    Every strictly-lower entry of A is 1/(s-1) and b = (1/s) e, so the
    abscissae are c_i = (i-1)/(s-1).  Embedded weight choices:

    * ``b1``: (1/(s-1), ..., 1/(s-1), 0) -- first order, keeps the
      embedded SSP coefficient at s-1.
    * ``b2``: ((s+1)/s^2, 1/s, ..., 1/s, (s-1)/s^2) -- first order, the
      recommended pair on stability and error-measure grounds.
    """
    if s < 2:
        raise ValueError("second-order family needs at least 2 stages")
    low = Fraction(1, s - 1)
    A = [[low if j < i else Fraction(0) for j in range(s)] for i in range(s)]
    b = [Fraction(1, s)] * s
    bt = pt = None
    if variant == "b1":
        bt = [low] * (s - 1) + [Fraction(0)]
        pt = 1
    elif variant == "b2":
        bt = [Fraction(s + 1, s * s)] + [Fraction(1, s)] * (s - 2) + [Fraction(s - 1, s * s)]
        pt = 1
    elif variant != "none":
        raise ValueError(f"unknown embedded variant {variant!r} for ssp{s},2")
    return _tableau(MethodId("ssp2", s, variant), A, b, 2, bt, pt, ssp=float(s - 1))


def ssperk_n2_3(n: int, variant: str = "none") -> EmbeddedTableau:
    """Optimal third-order SSP method with s = n^2 stages (n >= 2).

    SSP coefficient n^2 - n.  Every strictly-lower entry of A is
    1/(n(n-1)), except a block of 1/(n(2n-1)) entries in the final
    n(n-1)/2 rows: in those rows the 2n-1 columns starting after column
    (n-1)(n-2)/2 carry 1/(n(2n-1)).  The weight vector b has the same
    three-segment layout: (n-1)(n-2)/2 entries of 1/(n(n-1)), then 2n-1
    entries of 1/(n(2n-1)), then n(n-1)/2 entries of 1/(n(n-1)).

    Embedded weight choices: for n = 2 the vectors ``b1`` =
    (1/3, 1/3, 1/3, 0) and ``b2`` = (1/4, 1/4, 1/4, 1/4); for n >= 3 the
    uniform vector (1/n^2) e, selected with variant ``none``.
    """
    if n < 2:
        raise ValueError("third-order family needs n >= 2 (s = n^2 stages)")
    s = n * n
    low = Fraction(1, n * (n - 1))
    blk = Fraction(1, n * (2 * n - 1))
    q = (n - 1) * (n - 2) // 2       # columns before the block
    m = n * (n - 1) // 2             # block rows (the final ones)
    A = [[Fraction(0)] * s for _ in range(s)]
    for i in range(s):
        for j in range(i):
            in_block = i >= s - m and q <= j < q + 2 * n - 1
            A[i][j] = blk if in_block else low
    b = [low] * q + [blk] * (2 * n - 1) + [low] * m
    bt = pt = None
    if n == 2:
        if variant == "b1":
            bt = [Fraction(1, 3)] * 3 + [Fraction(0)]
            pt = 2
        elif variant == "b2":
            bt = [Fraction(1, 4)] * 4
            pt = 2
        elif variant != "none":
            raise ValueError(f"unknown embedded variant {variant!r} for ssp4,3")
    else:
        if variant != "none":
            raise ValueError(f"ssp{s},3 has only the uniform embedded pair")
        bt = [Fraction(1, s)] * s
        pt = 2
    mid = MethodId("ssp3", s, variant)
    return _tableau(mid, A, b, 3, bt, pt, ssp=float(s - n))


def ssperk_3_3() -> EmbeddedTableau:
    """Classical three-stage third-order SSP method, SSP coefficient 1.

    Carries no frozen embedded weights; adaptive use goes through the
    optimizer (method id ``ssp3,3-w``).
    """
    A = [[0, 0, 0], [1, 0, 0], [Fraction(1, 4), Fraction(1, 4), 0]]
    b = [Fraction(1, 6), Fraction(1, 6), Fraction(2, 3)]
    return _tableau(MethodId("ssp3", 3, "none"), A, b, 3, ssp=1.0)


def ssperk_10_4(variant: str = "none") -> EmbeddedTableau:
    """Ten-stage fourth-order SSP method with SSP coefficient 6.

    Rows 1-5 of A have 1/6 on every strictly-lower entry; rows 6-10 have
    1/15 in columns 1-5 and 1/6 afterwards.  b = (1/10) e.  Eight embedded
    third-order weight vectors ``b1`` .. ``b8`` are cataloged; ``b3`` is
    the recommended pair.
    """
    F = Fraction
    A = [[F(0)] * 10 for _ in range(10)]
    for i in range(10):
        for j in range(i):
            A[i][j] = F(1, 15) if (i >= 5 and j < 5) else F(1, 6)
    b = [F(1, 10)] * 10
    pairs = {
        "b1": [0, F(3, 8), 0, F(1, 8), 0, 0, 0, F(3, 8), 0, F(1, 8)],
        "b2": [F(3, 14), 0, 0, F(2, 7), 0, 0, 0, F(3, 7), 0, F(1, 14)],
        "b3": [0, F(2, 9), 0, 0, F(5, 18), F(1, 3), 0, 0, 0, F(1, 6)],
        "b4": [F(1, 5), 0, 0, F(3, 10), 0, 0, F(1, 5), 0, F(3, 10), 0],
        "b5": [F(1, 10), 0, 0, F(2, 5), 0, F(3, 10), 0, 0, 0, F(1, 5)],
        "b6": [F(1, 6), 0, 0, 0, F(1, 3), F(5, 18), 0, 0, F(2, 9), 0],
        "b7": [0, F(2, 5), 0, F(1, 10), 0, 0, 0, F(1, 5), F(3, 10), 0],
        "b8": [F(1, 7), 0, F(5, 14), 0, 0, 0, 0, F(3, 14), F(2, 7), 0],
    }
    bt = pt = None
    if variant != "none":
        if variant not in pairs:
            raise ValueError(f"unknown embedded variant {variant!r} for ssp10,4")
        bt, pt = pairs[variant], 3
    return _tableau(MethodId("ssp4", 10, variant), A, b, 4, bt, pt, ssp=6.0)


def literature_pair(name: str) -> EmbeddedTableau:
    """Classical non-SSP embedded pairs used for comparison runs.

    ``bs32``: the 4-stage 3(2) pair of Bogacki and Shampine.
    ``dp54``: the 7-stage 5(4) pair of Dormand and Prince.
    """
    F = Fraction
    name = name.strip().lower()
    if name == "bs32":
        A = [
            [0, 0, 0, 0],
            [F(1, 2), 0, 0, 0],
            [0, F(3, 4), 0, 0],
            [F(2, 9), F(1, 3), F(4, 9), 0],
        ]
        b = [F(2, 9), F(1, 3), F(4, 9), 0]
        bt = [F(7, 24), F(1, 4), F(1, 3), F(1, 8)]
        return _tableau(MethodId("literature", 4), A, b, 3, bt, 2, ssp=None)
    if name == "dp54":
        A = [
            [0] * 7,
            [F(1, 5), 0, 0, 0, 0, 0, 0],
            [F(3, 40), F(9, 40), 0, 0, 0, 0, 0],
            [F(44, 45), F(-56, 15), F(32, 9), 0, 0, 0, 0],
            [F(19372, 6561), F(-25360, 2187), F(64448, 6561), F(-212, 729), 0, 0, 0],
            [F(9017, 3168), F(-355, 33), F(46732, 5247), F(49, 176), F(-5103, 18656), 0, 0],
            [F(35, 384), 0, F(500, 1113), F(125, 192), F(-2187, 6784), F(11, 84), 0],
        ]
        b = [F(35, 384), 0, F(500, 1113), F(125, 192), F(-2187, 6784), F(11, 84), 0]
        bt = [F(5179, 57600), 0, F(7571, 16695), F(393, 640), F(-92097, 339200), F(187, 2100), F(1, 40)]
        return _tableau(MethodId("literature", 7), A, b, 5, bt, 4, ssp=None)
    raise ValueError(f"unknown literature pair: {name!r}")


_W_CACHE: dict[tuple[str, int], EmbeddedTableau] = {}


def resolve(method, seed: int = 0) -> EmbeddedTableau:
    """Return the catalog tableau for a method id (text or MethodId).

    Variant ``w`` attaches embedded weights computed by the numerical
    optimizer; the result is deterministic for a given seed and memoized
    per process.
    """
    mid = parse_method_id(method) if isinstance(method, str) else method
    if mid.family == "literature":
        return literature_pair({4: "bs32", 7: "dp54"}[mid.s])
    if mid.variant == "w":
        key = (format_method_id(mid), seed)
        if key not in _W_CACHE:
            base = resolve(MethodId(mid.family, mid.s, "none"))
            from .optimizer import OptimizationSpec, optimize_embedded

            res = optimize_embedded(OptimizationSpec(tableau=base, seed=seed))
            if res.w is None:
                raise ValueError(f"optimizer found no embedded weights for {method}")
            _W_CACHE[key] = EmbeddedTableau(
                id=format_method_id(mid),
                A=base.A,
                b=base.b,
                c=base.c,
                p=base.p,
                b_tilde=res.w,
                p_tilde=base.p - 1,
                ssp_claimed=base.ssp_claimed,
            )
        return _W_CACHE[key]
    if mid.family == "ssp2":
        return ssperk_s2(mid.s, mid.variant)
    if mid.family == "ssp3":
        if mid.s == 3:
            if mid.variant != "none":
                raise ValueError("ssp3,3 embedded weights come from the optimizer (-w)")
            return ssperk_3_3()
        n = int(round(mid.s ** 0.5))
        if n * n != mid.s:
            raise ValueError(f"third-order family needs a square stage count, got {mid.s}")
        return ssperk_n2_3(n, mid.variant)
    if mid.family == "ssp4":
        if mid.s != 10:
            raise ValueError("fourth-order family is cataloged with 10 stages only")
        return ssperk_10_4(mid.variant)
    raise ValueError(f"unknown method family {mid.family!r}")


def catalog_ids() -> list[str]:
    """Canonical ids of every cataloged pair (embedded weights present)."""
    ids = []
    for s in range(2, 11):
        ids += [f"ssp{s},2-b1", f"ssp{s},2-b2"]
    ids += ["ssp4,3-b1", "ssp4,3-b2", "ssp9,3", "ssp16,3"]
    ids += [f"ssp10,4-b{k}" for k in range(1, 9)]
    ids += ["bs32", "dp54"]
    return ids


def ssp_catalog_ids() -> list[str]:
    """Subset of catalog_ids whose advancing method claims an SSP coefficient."""
    return [i for i in catalog_ids() if resolve(i).ssp_claimed is not None]


def with_advancing_weights(t: EmbeddedTableau, use_embedded: bool = False) -> EmbeddedTableau:
    """Copy of ``t`` advancing with its own b, or with b_tilde if requested.

    Swapping in the embedded weights gives the plain method RK(A, b_tilde)
    for fixed-step order studies; the copy carries no embedded vector.
    """
    if not use_embedded:
        return EmbeddedTableau(id=t.id, A=t.A, b=t.b, c=t.c, p=t.p, ssp_claimed=t.ssp_claimed)
    if t.b_tilde is None:
        raise ValueError(f"{t.id} has no embedded weights")
    return EmbeddedTableau(id=t.id + "~emb", A=t.A, b=t.b_tilde, c=t.c, p=t.p_tilde or t.p - 1)


def validate(t: EmbeddedTableau) -> list[str]:
    """Structural diagnostics; an empty list means the tableau is well formed.

    Checks (tolerance 1e-13): A strictly lower triangular, c = A e,
    weight vectors summing to 1, p_tilde = p - 1 when embedded weights are
    present, and nonnegativity of A, b, b_tilde for entries claiming an
    SSP coefficient.
    """
    issues = []
    s = t.s
    if t.A.shape != (s, s) or len(t.c) != s:
        issues.append("shape violation: A, b, c sizes disagree")
        return issues
    if np.any(np.abs(np.triu(t.A)) > 0):
        issues.append("explicit-structure violation: upper triangle of A not zero")
    if np.max(np.abs(t.c - t.A.sum(axis=1))) > _ATOL:
        issues.append("row-sum violation: c != A e")
    if abs(t.b.sum() - 1.0) > _ATOL:
        issues.append("consistency violation: advancing weights do not sum to 1")
    if t.b_tilde is not None:
        if len(t.b_tilde) != s:
            issues.append("shape violation: embedded weights have wrong length")
        elif abs(t.b_tilde.sum() - 1.0) > _ATOL:
            issues.append("consistency violation: embedded weights do not sum to 1")
        if t.p_tilde is not None and t.p_tilde != t.p - 1:
            issues.append("embedded-order violation: p_tilde != p - 1")
    if t.ssp_claimed is not None and t.ssp_claimed > 0:
        arrays = [t.A, t.b] + ([t.b_tilde] if t.b_tilde is not None else [])
        if any(np.min(a) < -_ATOL for a in arrays):
            issues.append("negativity violation: SSP entry claims require nonnegative coefficients")
    return issues


def to_json_dict(t: EmbeddedTableau) -> dict:
    """JSON-ready dict of the tableau (row-major A, plain lists)."""
    return {
        "id": t.id,
        "s": t.s,
        "p": t.p,
        "p_tilde": t.p_tilde,
        "ssp_claimed": t.ssp_claimed,
        "A": [[float(x) for x in row] for row in t.A],
        "b": [float(x) for x in t.b],
        "b_tilde": None if t.b_tilde is None else [float(x) for x in t.b_tilde],
        "c": [float(x) for x in t.c],
    }
