"""Test systems: Van der Pol, Brusselator, WENO5 linear advection, WENO5
1-D Euler (Sod shock tube), and a first-order upwind advection operator
used by the TVD property checks.

PDE right-hand sides are method-of-lines semi-discretizations over a
finite-volume Grid1D; state vectors hold cell averages (Euler flattens
the three conserved fields into one vector).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .integrator import OdeSystem

__all__ = [
    "Grid1D",
    "EulerState",
    "vdp_rhs",
    "brusselator_rhs",
    "weno5_reconstruct",
    "weno5_weights",
    "advection_rhs",
    "upwind_rhs",
    "euler_rhs",
    "total_variation",
    "cfl_step",
    "vdp",
    "brusselator",
    "advection",
    "euler_sod",
    "upwind_advection",
    "make_problem",
    "PROBLEM_IDS",
]

GAMMA_AIR = 7.0 / 5.0
CFL_DEFAULT = 0.5


@dataclass(frozen=True)
class Grid1D:
    """Uniform finite-volume grid; cell centers at x_min + (i+1/2)dx."""

    n_cells: int
    x_min: float
    x_max: float
    boundary: str = "periodic"  # or "outflow"

    def __post_init__(self):
        if self.n_cells < 1 or self.x_max <= self.x_min:
            raise ValueError("degenerate grid")
        if self.boundary not in ("periodic", "outflow"):
            raise ValueError(f"unknown boundary {self.boundary!r}")

    @property
    def dx(self) -> float:
        return (self.x_max - self.x_min) / self.n_cells

    @property
    def centers(self) -> np.ndarray:
        return self.x_min + (np.arange(self.n_cells) + 0.5) * self.dx

    @property
    def edges(self) -> np.ndarray:
        return self.x_min + np.arange(self.n_cells + 1) * self.dx


@dataclass(frozen=True)
class EulerState:
    """Conserved fields (rho, rho*u, E) on a grid, with the gas constant."""

    rho: np.ndarray
    mom: np.ndarray
    E: np.ndarray
    gamma: float = GAMMA_AIR

    def pressure(self) -> np.ndarray:
        return (self.gamma - 1.0) * (self.E - 0.5 * self.mom**2 / self.rho)

    def sound_speed(self) -> np.ndarray:
        return np.sqrt(self.gamma * self.pressure() / self.rho)

    def is_valid(self) -> bool:
        return bool(np.all(self.rho > 0) and np.all(self.pressure() > 0))

    def flatten(self) -> np.ndarray:
        return np.concatenate([self.rho, self.mom, self.E])

    @staticmethod
    def from_flat(q: np.ndarray, gamma: float = GAMMA_AIR) -> "EulerState":
        n = q.size // 3
        return EulerState(q[:n], q[n : 2 * n], q[2 * n :], gamma)


# ---------------------------------------------------------------------------
# ODE right-hand sides


def vdp_rhs(t: float, u: np.ndarray, eps: float = 0.1) -> np.ndarray:
    # stiff scaling: the initial point [2, -0.6654321] sits on the slow
    # manifold u2 ~ u1/(1 - u1^2), so the whole bracket carries 1/eps
    return np.array([u[1], ((1.0 - u[0] ** 2) * u[1] - u[0]) / eps])


def brusselator_rhs(t: float, u: np.ndarray) -> np.ndarray:
    x, y = u
    return np.array([1.0 + x * x * y - 4.0 * x, 3.0 * x - x * x * y])


# ---------------------------------------------------------------------------
# WENO5 reconstruction

_WENO_EPS = 1e-6
_D0, _D1, _D2 = 0.1, 0.6, 0.3


def _weno5_parts(vm2, vm1, v0, vp1, vp2):
    """Candidate values and nonlinear weights at the right face of the
    center cell from the three left-biased stencils.  Vectorized."""
    q0 = (2.0 * vm2 - 7.0 * vm1 + 11.0 * v0) / 6.0
    q1 = (-vm1 + 5.0 * v0 + 2.0 * vp1) / 6.0
    q2 = (2.0 * v0 + 5.0 * vp1 - vp2) / 6.0
    b0 = 13.0 / 12.0 * (vm2 - 2.0 * vm1 + v0) ** 2 + 0.25 * (vm2 - 4.0 * vm1 + 3.0 * v0) ** 2
    b1 = 13.0 / 12.0 * (vm1 - 2.0 * v0 + vp1) ** 2 + 0.25 * (vm1 - vp1) ** 2
    b2 = 13.0 / 12.0 * (v0 - 2.0 * vp1 + vp2) ** 2 + 0.25 * (3.0 * v0 - 4.0 * vp1 + vp2) ** 2
    a0 = _D0 / (_WENO_EPS + b0) ** 2
    a1 = _D1 / (_WENO_EPS + b1) ** 2
    a2 = _D2 / (_WENO_EPS + b2) ** 2
    asum = a0 + a1 + a2
    return (q0, q1, q2), (a0 / asum, a1 / asum, a2 / asum)


def _weno5_face(vm2, vm1, v0, vp1, vp2):
    (q0, q1, q2), (w0, w1, w2) = _weno5_parts(vm2, vm1, v0, vp1, vp2)
    return w0 * q0 + w1 * q1 + w2 * q2


def weno5_reconstruct(v) -> float:
    """Interface value v_{i+1/2} from the five cell averages
    (v_{i-2}, ..., v_{i+2}), biased for a right-moving wave."""
    vm2, vm1, v0, vp1, vp2 = (float(x) for x in v)
    return float(_weno5_face(vm2, vm1, v0, vp1, vp2))


def weno5_weights(v) -> np.ndarray:
    """The three convex stencil weights used by weno5_reconstruct."""
    vm2, vm1, v0, vp1, vp2 = (float(x) for x in v)
    _, w = _weno5_parts(vm2, vm1, v0, vp1, vp2)
    return np.array(w)


# ---------------------------------------------------------------------------
# advection semi-discretizations (periodic)


def advection_rhs(u: np.ndarray, grid: Grid1D) -> np.ndarray:
    """WENO5 upwind du/dt for u_t + u_x = 0 (wave speed +1, periodic)."""
    vm2 = np.roll(u, 2)
    vm1 = np.roll(u, 1)
    vp1 = np.roll(u, -1)
    vp2 = np.roll(u, -2)
    flux = _weno5_face(vm2, vm1, u, vp1, vp2)  # F_{i+1/2}
    return -(flux - np.roll(flux, 1)) / grid.dx


def upwind_rhs(u: np.ndarray, grid: Grid1D) -> np.ndarray:
    """First-order upwind du/dt; forward Euler is TVD up to dt = dx."""
    return -(u - np.roll(u, 1)) / grid.dx


# ---------------------------------------------------------------------------
# 1-D Euler with global Lax-Friedrichs splitting and componentwise WENO5

_N_GHOST = 3


def euler_rhs(q_flat: np.ndarray, grid: Grid1D, gamma: float = GAMMA_AIR) -> np.ndarray:
    n = grid.n_cells
    q = q_flat.reshape(3, n)
    # outflow: three ghost cells per side copy the edge cell
    qg = np.concatenate(
        [np.repeat(q[:, :1], _N_GHOST, axis=1), q, np.repeat(q[:, -1:], _N_GHOST, axis=1)],
        axis=1,
    )
    rho, mom, E = qg
    # invalid states (rho or p <= 0) propagate NaN and fail the step
    with np.errstate(invalid="ignore", over="ignore", divide="ignore"):
        u = mom / rho
        p = (gamma - 1.0) * (E - 0.5 * mom * u)
        F = np.stack([mom, mom * u + p, (E + p) * u])
        alpha = float(np.max(np.abs(u) + np.sqrt(gamma * p / rho)))
    fp = 0.5 * (F + alpha * qg)
    fm = 0.5 * (F - alpha * qg)
    # faces i-1/2 for i = 0..n: left-biased states from f+, mirrored
    # right-biased states from f-
    m = n + 1
    left = _weno5_face(fp[:, 0:m], fp[:, 1 : m + 1], fp[:, 2 : m + 2], fp[:, 3 : m + 3], fp[:, 4 : m + 4])
    right = _weno5_face(fm[:, 5 : m + 5], fm[:, 4 : m + 4], fm[:, 3 : m + 3], fm[:, 2 : m + 2], fm[:, 1 : m + 1])
    face = left + right
    return (-(face[:, 1:] - face[:, :-1]) / grid.dx).reshape(-1)


# ---------------------------------------------------------------------------
# diagnostics


def total_variation(u: np.ndarray, periodic: bool = True) -> float:
    tv = float(np.sum(np.abs(np.diff(u))))
    if periodic:
        tv += float(abs(u[0] - u[-1]))
    return tv


def euler_max_speed(q_flat: np.ndarray, gamma: float = GAMMA_AIR) -> float:
    st = EulerState.from_flat(np.asarray(q_flat, dtype=float), gamma)
    return float(np.max(np.abs(st.mom / st.rho) + st.sound_speed()))


def cfl_step(grid: Grid1D, c_max: float, nu: float) -> float:
    """dt = nu*dx/c_max; a quiescent field (c_max = 0) returns inf."""
    if nu <= 0:
        raise ValueError("nu must be positive")
    if c_max <= 0:
        return math.inf
    return nu * grid.dx / c_max


# ---------------------------------------------------------------------------
# initial profiles as exact cell averages


def square_wave_average(grid: Grid1D, lo: float = -0.5, hi: float = 0.5) -> np.ndarray:
    """Cell averages of the indicator of [lo, hi]."""
    xl = grid.edges[:-1]
    xr = grid.edges[1:]
    return np.clip((np.minimum(xr, hi) - np.maximum(xl, lo)) / grid.dx, 0.0, 1.0)


def sine_average(grid: Grid1D, shift: float = 0.0) -> np.ndarray:
    """Cell averages of sin(pi (x - shift)) on the grid."""
    xl = grid.edges[:-1] - shift
    xr = grid.edges[1:] - shift
    return (np.cos(np.pi * xl) - np.cos(np.pi * xr)) / (np.pi * grid.dx)


# ---------------------------------------------------------------------------
# problem factories

PROBLEM_IDS = ("vdp", "brusselator", "advection", "euler")


def vdp(eps: float = 0.1) -> OdeSystem:
    return OdeSystem(
        f=lambda t, u: vdp_rhs(t, u, eps),
        t_span=(0.0, 2.0),
        u0=np.array([2.0, -0.6654321]),
        name="vdp",
    )


def brusselator() -> OdeSystem:
    return OdeSystem(
        f=lambda t, u: brusselator_rhs(t, u),
        t_span=(0.0, 20.0),
        u0=np.array([1.01, 3.0]),
        name="brusselator",
    )


def advection(
    n_cells: int = 200,
    profile: str = "square",
    t_final: float = 0.2,
    nu: float = CFL_DEFAULT,
) -> OdeSystem:
    grid = Grid1D(n_cells, -1.0, 1.0, "periodic")
    if profile == "square":
        u0 = square_wave_average(grid)
    elif profile == "sine":
        u0 = sine_average(grid)
    else:
        raise ValueError(f"unknown profile {profile!r}")
    sys = OdeSystem(
        f=lambda t, u: advection_rhs(u, grid),
        t_span=(0.0, t_final),
        u0=u0,
        cfl_hint=lambda u: cfl_step(grid, 1.0, nu),
        name="advection",
    )
    sys.grid = grid
    return sys


def upwind_advection(n_cells: int = 200) -> OdeSystem:
    grid = Grid1D(n_cells, -1.0, 1.0, "periodic")
    sys = OdeSystem(
        f=lambda t, u: upwind_rhs(u, grid),
        t_span=(0.0, 0.2),
        u0=square_wave_average(grid),
        cfl_hint=lambda u: cfl_step(grid, 1.0, 1.0),
        name="upwind",
    )
    sys.grid = grid
    return sys


def sod_initial(grid: Grid1D, gamma: float = GAMMA_AIR) -> np.ndarray:
    x = grid.centers
    rho = np.where(x < 0.5, 1.0, 0.125)
    mom = np.zeros_like(x)
    E = np.where(x < 0.5, 1.0, 0.1) / (gamma - 1.0)
    return np.concatenate([rho, mom, E])


def euler_sod(
    n_cells: int = 200,
    t_final: float = 0.2,
    gamma: float = GAMMA_AIR,
    nu: float = CFL_DEFAULT,
) -> OdeSystem:
    grid = Grid1D(n_cells, 0.0, 1.0, "outflow")
    sys = OdeSystem(
        f=lambda t, q: euler_rhs(q, grid, gamma),
        t_span=(0.0, t_final),
        u0=sod_initial(grid, gamma),
        cfl_hint=lambda q: cfl_step(grid, euler_max_speed(q, gamma), nu),
        name="euler",
    )
    sys.grid = grid
    return sys


def make_problem(problem_id: str, n_cells: int = 200) -> OdeSystem:
    pid = problem_id.lower()
    if pid == "vdp":
        return vdp()
    if pid == "brusselator":
        return brusselator()
    if pid == "advection":
        return advection(n_cells)
    if pid == "euler":
        return euler_sod(n_cells)
    raise ValueError(f"unknown problem id {problem_id!r}")
