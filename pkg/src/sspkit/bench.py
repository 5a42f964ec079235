"""Work-precision benchmarking: methods x problems x tolerance ladder,
one CSV row per run, with a cached high-accuracy reference per problem.

Work is counted as function evaluations, s per attempted step.  Individual
run failures become rows with a failure status; the sweep never aborts.
"""

from __future__ import annotations

import csv
import io
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .controller import make_controller
from .integrator import BudgetError, StiffnessError, integrate_adaptive
from .problems import make_problem
from .tableau import resolve

__all__ = [
    "BenchPlan",
    "WorkPrecisionRow",
    "DEFAULT_TOLERANCES",
    "CSV_COLUMNS",
    "reference_endpoint",
    "run_single",
    "run_bench",
    "rows_to_csv",
]

DEFAULT_TOLERANCES = (1e-2, 1e-3, 1e-4, 1e-5, 1e-6, 1e-7)
REFERENCE_METHOD = "dp54"
REFERENCE_TOL = 1e-12
CSV_COLUMNS = "method,problem,tol,accepted,rejected,nfev,global_error,wall_ms,status"


@dataclass(frozen=True)
class BenchPlan:
    methods: tuple[str, ...]
    problems: tuple[str, ...]
    tolerances: tuple[float, ...] = DEFAULT_TOLERANCES
    controller: str = "pid"
    n_jobs: int = 1
    seed: int = 0

    def __post_init__(self):
        if not self.methods or not self.problems:
            raise ValueError("need at least one method and one problem")
        if any(b >= a for a, b in zip(self.tolerances, self.tolerances[1:])):
            raise ValueError("tolerances must be strictly decreasing")


@dataclass(frozen=True)
class WorkPrecisionRow:
    method: str
    problem: str
    tol: float
    accepted: int
    rejected: int
    nfev: int
    global_error: float
    wall_ms: float
    status: str = "ok"


def reference_endpoint(problem_id: str, seed: int = 0) -> np.ndarray:
    """Endpoint of the problem under the reference method at tight tolerance."""
    prob = make_problem(problem_id)
    tab = resolve(REFERENCE_METHOD, seed=seed)
    res = integrate_adaptive(
        prob, tab, make_controller("pid"), REFERENCE_TOL, REFERENCE_TOL
    )
    return res.u


def run_single(
    method_id: str,
    problem_id: str,
    tol: float,
    controller: str,
    u_ref: np.ndarray,
    seed: int = 0,
) -> WorkPrecisionRow:
    tab = resolve(method_id, seed=seed)
    prob = make_problem(problem_id)
    t0 = time.perf_counter()
    try:
        res = integrate_adaptive(
            prob, tab, make_controller(controller), tol, tol
        )
    except StiffnessError:
        return WorkPrecisionRow(
            method_id, problem_id, tol, 0, 0, 0, float("nan"),
            1e3 * (time.perf_counter() - t0), "stiffness-failure",
        )
    except BudgetError:
        return WorkPrecisionRow(
            method_id, problem_id, tol, 0, 0, 0, float("nan"),
            1e3 * (time.perf_counter() - t0), "budget-failure",
        )
    wall_ms = 1e3 * (time.perf_counter() - t0)
    err = float(np.linalg.norm(res.u - u_ref))
    return WorkPrecisionRow(
        method_id, problem_id, tol, res.n_accepted, res.n_rejected,
        res.n_fev, err, wall_ms, "ok",
    )


def _worker(task):
    method_id, problem_id, tol, controller, u_ref, seed = task
    return run_single(method_id, problem_id, tol, controller, u_ref, seed)


def run_bench(plan: BenchPlan) -> list[WorkPrecisionRow]:
    """All rows of the plan, sorted by (problem, method, tol descending)."""
    refs = {pid: reference_endpoint(pid, plan.seed) for pid in plan.problems}
    tasks = [
        (m, p, tol, plan.controller, refs[p], plan.seed)
        for p in plan.problems
        for m in plan.methods
        for tol in plan.tolerances
    ]
    if plan.n_jobs > 1:
        with ProcessPoolExecutor(max_workers=plan.n_jobs) as pool:
            rows = list(pool.map(_worker, tasks))
    else:
        rows = [_worker(t) for t in tasks]
    rows.sort(key=lambda r: (r.problem, r.method, -r.tol))
    return rows


def rows_to_csv(rows, relative_to: str | None = None) -> list[str]:
    """CSV lines; with relative_to, an extra column normalizes nfev by the
    named method's nfev at the same (problem, tol).  Method ids contain
    commas, so fields carry standard CSV quoting."""
    header = CSV_COLUMNS
    base = {}
    if relative_to is not None:
        header += ",relative_work"
        for r in rows:
            if r.method == relative_to and r.status == "ok":
                base[(r.problem, r.tol)] = r.nfev
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header.split(","))
    for r in rows:
        rec = [r.method, r.problem, f"{r.tol:g}", r.accepted, r.rejected,
               r.nfev, f"{r.global_error:.12g}", f"{r.wall_ms:.3f}", r.status]
        if relative_to is not None:
            ref = base.get((r.problem, r.tol))
            rec.append(f"{r.nfev / ref:.6g}" if ref else "")
        w.writerow(rec)
    return buf.getvalue().splitlines()
