"""Embedded explicit RK stepping: dual-solution steps, the weighted error
norm, starting step-size selection, the adaptive accept/reject loop, and a
fixed-step driver for convergence studies.

The solution is always advanced with the higher-order weights b (local
extrapolation); the embedded weights enter only through the error estimate.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .controller import ControllerState
from .tableau import EmbeddedTableau

__all__ = [
    "OdeSystem",
    "IntegrationResult",
    "StiffnessError",
    "BudgetError",
    "rk_step",
    "error_norm",
    "initial_step",
    "integrate_adaptive",
    "integrate_fixed",
]

MAX_ATTEMPTS = 10_000_000


class StiffnessError(RuntimeError):
    """Step size collapsed below the resolvable scale at the current time."""


class BudgetError(RuntimeError):
    """Attempted-step budget exhausted before reaching the final time."""


@dataclass
class OdeSystem:
    """Right-hand side u' = f(t, u) with its time span and initial state.

    cfl_hint, when present, maps a state vector to a stability-motivated
    step bound; it only caps the starting step, the error controller owns
    the step afterwards.
    """

    f: Callable[[float, np.ndarray], np.ndarray]
    t_span: tuple[float, float]
    u0: np.ndarray
    cfl_hint: Callable[[np.ndarray], float] | None = None
    name: str = ""

    @property
    def dimension(self) -> int:
        return int(np.size(self.u0))


@dataclass
class IntegrationResult:
    t: float
    u: np.ndarray
    n_accepted: int
    n_rejected: int
    n_fev: int
    step_log: list = field(default_factory=list)  # (t, dt, err, accepted)
    dense_t: np.ndarray | None = None
    dense_u: np.ndarray | None = None

    @property
    def n_attempts(self) -> int:
        return self.n_accepted + self.n_rejected


def rk_step(
    tab: EmbeddedTableau,
    f: Callable,
    t_n: float,
    u_n: np.ndarray,
    dt: float,
) -> tuple[np.ndarray, np.ndarray | None]:
    """One explicit RK step: (u_next from b, u_hat from b_tilde).

    The two solutions share the s stage evaluations; u_hat is None when
    the tableau carries no embedded weights.
    """
    A, c = tab.A, tab.c
    s = tab.s
    k = np.empty((s,) + np.shape(u_n))
    k[0] = f(t_n + c[0] * dt, u_n)
    for i in range(1, s):
        u_i = u_n + dt * np.tensordot(A[i, :i], k[:i], axes=1)
        k[i] = f(t_n + c[i] * dt, u_i)
    u_next = u_n + dt * np.tensordot(tab.b, k, axes=1)
    if tab.b_tilde is None:
        return u_next, None
    u_hat = u_n + dt * np.tensordot(tab.b_tilde, k, axes=1)
    return u_next, u_hat


def error_norm(
    u_n: np.ndarray,
    u_next: np.ndarray,
    u_hat: np.ndarray,
    atol: float,
    rtol: float,
) -> float:
    """Max norm of (u_next - u_hat)/sc, sc = atol + max(|u_n|,|u_next|)*rtol."""
    sc = atol + np.maximum(np.abs(u_n), np.abs(u_next)) * rtol
    return float(np.max(np.abs(u_next - u_hat) / sc))


def _rms(v: np.ndarray, sc: np.ndarray) -> float:
    return float(np.sqrt(np.mean((v / sc) ** 2)))


def initial_step(
    f: Callable,
    t0: float,
    u0: np.ndarray,
    p: int,
    atol: float,
    rtol: float,
    cfl_bound: float | None = None,
) -> float:
    """Starting step from the magnitudes of u0, f, and a Euler-probe
    estimate of f', capped by the CFL bound when one is supplied."""
    u0 = np.asarray(u0, dtype=float)
    f0 = np.asarray(f(t0, u0), dtype=float)
    if not np.all(np.isfinite(f0)):
        raise StiffnessError("right-hand side not finite at the initial state")
    sc = atol + np.abs(u0) * rtol
    d0 = _rms(u0, sc)
    d1 = _rms(f0, sc)
    if d0 < 1e-5 or d1 < 1e-5:
        h0 = 1e-6
    else:
        h0 = 0.01 * d0 / d1
    u1 = u0 + h0 * f0
    f1 = np.asarray(f(t0 + h0, u1), dtype=float)
    if not np.all(np.isfinite(f1)):
        h1 = max(1e-6, h0 * 1e-3)
    else:
        d2 = _rms(f1 - f0, sc) / h0
        if max(d1, d2) <= 1e-15:
            h1 = max(1e-6, h0 * 1e-3)
        else:
            h1 = (0.01 / max(d1, d2)) ** (1.0 / (p + 1))
    dt0 = min(100 * h0, h1)
    if cfl_bound is not None:
        dt0 = min(dt0, cfl_bound)
    return dt0


def integrate_adaptive(
    problem: OdeSystem,
    tab: EmbeddedTableau,
    controller: ControllerState,
    atol: float,
    rtol: float,
    *,
    t_eval: Sequence[float] | None = None,
    max_attempts: int = MAX_ATTEMPTS,
    dt0: float | None = None,
) -> IntegrationResult:
    """Accept/reject loop: a step stands iff error_norm <= 1.

    The final step is truncated to land on T exactly (not a rejection).
    Raises StiffnessError on step underflow and BudgetError past
    max_attempts attempted steps.
    """
    if tab.b_tilde is None:
        raise ValueError(f"method {tab.id!r} has no embedded weights")
    f = problem.f
    t0, T = problem.t_span
    u = np.asarray(problem.u0, dtype=float).copy()
    t = float(t0)
    if dt0 is None:
        cfl = problem.cfl_hint(u) if problem.cfl_hint is not None else None
        dt = initial_step(f, t, u, tab.p, atol, rtol, cfl)
    else:
        dt = float(dt0)

    keep_path = t_eval is not None
    path_t = [t] if keep_path else None
    path_u = [u.copy()] if keep_path else None

    step_log: list[tuple[float, float, float, bool]] = []
    n_acc = 0
    n_rej = 0
    eps = float(np.finfo(float).eps)
    t_scale = max(abs(t0), abs(T), 1.0)

    while t < T:
        # |T| enters the underflow scale so the check is meaningful at t = 0
        if dt < 100.0 * eps * max(abs(t), t_scale):
            raise StiffnessError(
                f"step size {dt:.3e} underflowed at t = {t:.6g} "
                f"({n_acc} accepted, {n_rej} rejected)"
            )
        if n_acc + n_rej >= max_attempts:
            raise BudgetError(
                f"exceeded {max_attempts} attempted steps at t = {t:.6g}"
            )
        truncated = dt >= T - t
        dt_try = T - t if truncated else dt
        u_next, u_hat = rk_step(tab, f, t, u, dt_try)
        err = error_norm(u, u_next, u_hat, atol, rtol)
        accepted = err <= 1.0
        step_log.append((t, dt_try, err, accepted))
        # the estimate tracks the embedded solution's local error, so the
        # controller exponents normalize by the embedded order
        beta = controller.propose_factor(err, tab.p_tilde)
        if accepted:
            controller.on_accept(err)
            dt = controller.clamp(dt_try, beta)
            t = T if truncated else t + dt_try
            u = u_next
            n_acc += 1
            if keep_path:
                path_t.append(t)
                path_u.append(u.copy())
        else:
            controller.on_reject()
            dt = controller.clamp(dt_try, beta)
            n_rej += 1

    dense_t = dense_u = None
    if keep_path:
        dense_t = np.asarray(t_eval, dtype=float)
        pt = np.asarray(path_t)
        pu = np.asarray(path_u)
        dense_u = np.empty((dense_t.size, pu.shape[1]))
        for j in range(pu.shape[1]):
            dense_u[:, j] = np.interp(dense_t, pt, pu[:, j])

    return IntegrationResult(
        t=t,
        u=u,
        n_accepted=n_acc,
        n_rejected=n_rej,
        n_fev=tab.s * (n_acc + n_rej),
        step_log=step_log,
        dense_t=dense_t,
        dense_u=dense_u,
    )


def integrate_fixed(
    problem: OdeSystem,
    tab: EmbeddedTableau,
    dt: float,
    *,
    callback: Callable[[float, np.ndarray], None] | None = None,
) -> np.ndarray:
    """Uniform stepping with the advancing weights only; the last step is
    shortened to land on T.  callback(t, u) fires at t0 and after every
    step (total-variation monitoring and the like)."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    f = problem.f
    t0, T = problem.t_span
    u = np.asarray(problem.u0, dtype=float).copy()
    if callback is not None:
        callback(t0, u)
    n_steps = int(np.ceil((T - t0) / dt - 1e-9))
    t = float(t0)
    for i in range(n_steps):
        t_next = min(t0 + (i + 1) * dt, T)
        u, _ = rk_step(tab, f, t, u, t_next - t)
        t = t_next
        if callback is not None:
            callback(t, u)
    return u
