"""Conic backend: solves ConicProblem instances over the PSD cone.

The problem is handed to the solver in vectorized symmetric form (scaled
upper triangle); equalities go to the zero cone, inequalities and entrywise
nonnegativity rows to the nonnegative cone, and the matrix itself to the PSD
triangle cone.  Solves are single-threaded and deterministic by default.
"""

from __future__ import annotations

import os
import time
from dataclasses import dataclass, replace

import clarabel
import numpy as np
from scipy import sparse

from .errors import InputError
from .model import ConicProblem

OPTIMAL = "optimal"
NEAR_OPTIMAL = "near_optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"
TIME_LIMIT = "time_limit"
NUMERICAL_FAILURE = "numerical_failure"

SDP_TOL_ENV = "NASH_SDP_TOL"

_SQRT2 = np.sqrt(2.0)


@dataclass(frozen=True)
class SolverConfig:
    feasibility_tol: float = 1e-8
    gap_tol: float = 1e-8
    max_iterations: int = 200
    time_limit_s: float = 300.0
    # Opting into solver parallelism forfeits bitwise reproducibility.
    parallel: bool = False

    def __post_init__(self):
        if min(self.feasibility_tol, self.gap_tol, self.time_limit_s) <= 0:
            raise InputError("solver tolerances and time limit must be positive")
        if self.max_iterations <= 0:
            raise InputError("max_iterations must be positive")

    @staticmethod
    def from_env() -> "SolverConfig":
        """Default config, with feasibility tolerance overridable by env var."""
        cfg = SolverConfig()
        raw = os.environ.get(SDP_TOL_ENV)
        if raw:
            try:
                cfg = replace(cfg, feasibility_tol=float(raw))
            except ValueError as exc:
                raise InputError(f"bad {SDP_TOL_ENV} value {raw!r}") from exc
        return cfg


@dataclass(frozen=True)
class ConicSolution:
    status: str
    matrix: np.ndarray | None
    objective_value: float | None
    solve_time: float


def _svec_indices(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Row/column index arrays for the column-major upper triangle of an
    n-square matrix, matching the solver's PSD triangle ordering."""
    cols, rows = np.meshgrid(np.arange(n), np.arange(n), indexing="ij")
    mask = rows <= cols
    return rows[mask], cols[mask]


def _svec(mat: np.ndarray, rows: np.ndarray, cols: np.ndarray) -> np.ndarray:
    v = mat[rows, cols].astype(float).copy()
    v[rows != cols] *= _SQRT2
    return v


def _unsvec(v: np.ndarray, n: int, rows: np.ndarray, cols: np.ndarray) -> np.ndarray:
    out = np.zeros((n, n))
    vals = v.copy()
    off = rows != cols
    vals[off] /= _SQRT2
    out[rows, cols] = vals
    out[cols, rows] = vals
    return out


_STATUS_MAP = {
    "Solved": OPTIMAL,
    "AlmostSolved": NEAR_OPTIMAL,
    "PrimalInfeasible": INFEASIBLE,
    "AlmostPrimalInfeasible": INFEASIBLE,
    "DualInfeasible": UNBOUNDED,
    "AlmostDualInfeasible": UNBOUNDED,
    "MaxTime": TIME_LIMIT,
}


def solve(problem: ConicProblem, config: SolverConfig | None = None) -> ConicSolution:
    """Solve a ConicProblem; never silently wrong — failures are surfaced in
    the returned status."""
    cfg = config or SolverConfig()
    n = problem.dim
    rows, cols = _svec_indices(n)
    nvar = len(rows)

    q = _svec(problem.objective_matrix, rows, cols)

    a_rows: list[np.ndarray] = []
    b_vals: list[float] = []
    # Equalities first (zero cone).
    eqs = [c for c in problem.constraints if c.sense == "="]
    ineqs = [c for c in problem.constraints if c.sense == ">="]
    for c in eqs:
        a_rows.append(_svec(c.matrix, rows, cols))
        b_vals.append(c.rhs)
    n_eq = len(eqs)
    # Inequalities <F, M> >= rhs  ->  -<F, M> + s = -rhs, s >= 0.
    for c in ineqs:
        a_rows.append(-_svec(c.matrix, rows, cols))
        b_vals.append(-c.rhs)
    # Entrywise nonnegativity as linear rows (backend portability).
    pos = {(int(r), int(co)): k for k, (r, co) in enumerate(zip(rows, cols))}
    for i, j in problem.nonneg_indices:
        row = np.zeros(nvar)
        k = pos[(i, j)] if i <= j else pos[(j, i)]
        row[k] = -1.0 if i == j else -1.0 / _SQRT2
        a_rows.append(row)
        b_vals.append(0.0)
    n_ineq = len(a_rows) - n_eq

    a_dense = np.vstack(a_rows + [-np.eye(nvar)])
    amat = sparse.csc_matrix(a_dense)
    b = np.concatenate([np.asarray(b_vals), np.zeros(nvar)])
    cones = [
        clarabel.ZeroConeT(n_eq),
        clarabel.NonnegativeConeT(n_ineq),
        clarabel.PSDTriangleConeT(n),
    ]

    settings = clarabel.DefaultSettings()
    settings.verbose = False
    settings.tol_feas = cfg.feasibility_tol
    settings.tol_gap_abs = cfg.gap_tol
    settings.tol_gap_rel = cfg.gap_tol
    settings.max_iter = cfg.max_iterations
    settings.time_limit = cfg.time_limit_s
    if not cfg.parallel:
        settings.max_threads = 1

    pmat = sparse.csc_matrix((nvar, nvar))
    t0 = time.perf_counter()
    solver = clarabel.DefaultSolver(pmat, q, amat, b, cones, settings)
    sol = solver.solve()
    elapsed = time.perf_counter() - t0

    status = _STATUS_MAP.get(str(sol.status).split(".")[-1], NUMERICAL_FAILURE)
    if status in (OPTIMAL, NEAR_OPTIMAL):
        v = np.asarray(sol.x, dtype=float)
        if n_eq:
            # Polish: minimum-norm projection onto the equality constraints.
            # Downstream spectral identities rely on kernel directions that
            # the equalities imply; the correction is at the feasibility
            # tolerance scale and removes their amplification through small
            # eigenvalues.
            a_eq = a_dense[:n_eq]
            r = a_eq @ v - np.asarray(b_vals[:n_eq])
            mu = np.linalg.lstsq(a_eq @ a_eq.T, r, rcond=None)[0]
            v = v - a_eq.T @ mu
        mat = _unsvec(v, n, rows, cols)
        obj = float(sol.obj_val)
        if problem.maximize:
            obj = -obj
        return ConicSolution(status, mat, obj, elapsed)
    return ConicSolution(status, None, None, elapsed)
