"""Iterative linearization heuristics for driving moment solutions to low rank,
and the top-level solve pipeline."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import backend, model, recovery, spectral
from .backend import ConicSolution, SolverConfig
from .errors import FactorizationError, InputError, SolverFailure
from .games import (
    BimatrixGame,
    EpsilonReport,
    GameClass,
    StrategyProfile,
    classify,
    evaluate_epsilon,
    normalize,
)
from .model import ModelOptions, MomentSolution, Objective

METHOD_TRACE = "trace"
METHOD_SQRT = "sqrt"
METHOD_DIAGGAP = "diaggap"
METHODS = (METHOD_TRACE, METHOD_SQRT, METHOD_DIAGGAP)


@dataclass(frozen=True)
class RunConfig:
    max_iterations: int = 20
    decrease_tol: float = 1e-7  # stop when the true objective stalls
    division_guard: float = 1e-9  # floor under square-root weights
    solver: SolverConfig = field(default_factory=SolverConfig)

    def __post_init__(self):
        if self.max_iterations < 1:
            raise InputError("max_iterations must be at least 1")
        if min(self.decrease_tol, self.division_guard) <= 0:
            raise InputError("tolerances must be positive")


@dataclass(frozen=True)
class IterationRecord:
    surrogate_value: float
    true_objective: float
    eps: float
    rank: int
    solve_time: float


@dataclass(frozen=True)
class RunTrace:
    records: tuple[IterationRecord, ...]
    termination: str  # converged | max_iterations | numerical_failure

    @property
    def iterations(self) -> int:
        return len(self.records)


@dataclass(frozen=True)
class NashResult:
    profile: StrategyProfile
    report: EpsilonReport
    certificate: recovery.BoundCertificate
    trace: RunTrace
    game_class: GameClass
    method: str
    solution: MomentSolution
    normalization: object = None


def _to_moment(problem, sol: ConicSolution) -> MomentSolution:
    if sol.matrix is None:
        raise SolverFailure(f"solver returned status {sol.status}")
    mat = sol.matrix
    if problem.symmetric:
        mat = model.expand_symmetric(mat, problem.game_m)
    return MomentSolution(
        mat, problem.game_m, problem.game_n, sol.status, sol.objective_value
    )


def _iterate(
    game: BimatrixGame,
    config: RunConfig,
    symmetric: bool,
    make_objective,
    true_objective,
    update_state,
    init_state,
) -> tuple[MomentSolution, RunTrace]:
    """Shared loop: solve the surrogate, record the true objective, update the
    linearization point; returns the iterate with the smallest epsilon."""
    problem_opts = lambda obj: ModelOptions.sdp2(objective=obj, symmetric=symmetric)
    state = init_state
    records: list[IterationRecord] = []
    best: tuple[float, MomentSolution] | None = None
    prev_true = math.inf
    termination = "max_iterations"
    for _ in range(config.max_iterations):
        obj = make_objective(state)
        problem = model.build(game, problem_opts(obj))
        sol = backend.solve(problem, config.solver)
        if sol.matrix is None:
            termination = "numerical_failure"
            break
        moment = _to_moment(problem, sol)
        tv = true_objective(moment)
        if tv >= prev_true:
            # Solver noise at the stall point; drop the non-improving iterate.
            termination = "converged"
            break
        spec = spectral.eigendecompose(moment.inner, m=game.m)
        eps = evaluate_epsilon(game, recovery.extract_profile(moment)).eps
        records.append(
            IterationRecord(float(sol.objective_value), tv, eps, spec.rank, sol.solve_time)
        )
        if best is None or eps < best[0]:
            best = (eps, moment)
        state = update_state(moment)
        if prev_true - tv < config.decrease_tol:
            termination = "converged"
            break
        prev_true = tv
    if best is None:
        raise SolverFailure("no iteration produced a usable solution")
    return best[1], RunTrace(tuple(records), termination)


def run_square_root(
    game: BimatrixGame, config: RunConfig | None = None, symmetric: bool = False
) -> tuple[MomentSolution, RunTrace]:
    """Iteratively minimize the sum of square roots of the inner diagonal.

    The first iteration uses unit weights (the trace objective); afterwards
    the weights are the inverse square roots of the previous diagonal, and the
    linearization point is updated from diag(X), diag(Y).
    """
    cfg = config or RunConfig()
    dim = game.m + game.n

    # Objectives are stated in full space; build() folds them for the
    # compact symmetric model.
    def make_objective(weights):
        return Objective.weighted_diagonal(weights)

    def true_objective(moment: MomentSolution) -> float:
        return float(np.sqrt(np.maximum(np.diag(moment.inner), 0.0)).sum())

    def update_state(moment: MomentSolution):
        d = np.maximum(np.diag(moment.inner), cfg.division_guard)
        return 1.0 / np.sqrt(d)

    return _iterate(
        game,
        cfg,
        symmetric,
        make_objective,
        true_objective,
        update_state,
        np.ones(dim),
    )


def run_diagonal_gap(
    game: BimatrixGame, config: RunConfig | None = None, symmetric: bool = False
) -> tuple[MomentSolution, RunTrace]:
    """Iteratively minimize Tr(M) - x'x - y'y via its linearization.

    The first linearization point is the zero vector, making iteration one a
    plain trace solve; afterwards the point is the last-column strategies.
    """
    cfg = config or RunConfig()
    dim = game.m + game.n

    def make_objective(z_prev):
        return Objective.trace_minus_linear(2.0 * z_prev)

    def true_objective(moment: MomentSolution) -> float:
        z = np.concatenate([moment.x, moment.y])
        return float(np.trace(moment.inner) - z @ z)

    def update_state(moment: MomentSolution):
        return np.concatenate([moment.x, moment.y])

    return _iterate(
        game,
        cfg,
        symmetric,
        make_objective,
        true_objective,
        update_state,
        np.zeros(dim),
    )


def _run_trace(
    game: BimatrixGame, cfg: RunConfig, symmetric: bool
) -> tuple[MomentSolution, RunTrace]:
    problem = model.build(
        game, ModelOptions.sdp2(objective=Objective.trace(), symmetric=symmetric)
    )
    sol = backend.solve(problem, cfg.solver)
    moment = _to_moment(problem, sol)
    spec = spectral.eigendecompose(moment.inner, m=game.m)
    eps = evaluate_epsilon(game, recovery.extract_profile(moment)).eps
    tv = float(np.sqrt(np.maximum(np.diag(moment.inner), 0.0)).sum())
    rec = IterationRecord(float(sol.objective_value), tv, eps, spec.rank, sol.solve_time)
    return moment, RunTrace((rec,), "converged")


def solve_nash(
    game: BimatrixGame,
    method: str = METHOD_SQRT,
    config: RunConfig | None = None,
    symmetric: bool = False,
) -> NashResult:
    """Full pipeline: normalize, classify, run the heuristic, recover, certify.

    Strictly competitive games are solved with a single trace-objective solve,
    which is guaranteed exact.  All epsilons are in normalized payoff units.
    """
    if method not in METHODS:
        raise InputError(f"unknown method {method!r}")
    cfg = config or RunConfig()
    norm_game, record = normalize(game)
    gclass = classify(norm_game)
    if symmetric and (
        norm_game.m != norm_game.n
        or np.abs(norm_game.b - norm_game.a.T).max() > 1e-9
    ):
        raise InputError("symmetric solve requested for an asymmetric game")

    if gclass.kind in ("zero_sum", "strictly_competitive"):
        moment, trace = _run_trace(norm_game, cfg, symmetric=False)
        method_used = f"{METHOD_TRACE}:exact"
    elif method == METHOD_TRACE:
        moment, trace = _run_trace(norm_game, cfg, symmetric)
        method_used = METHOD_TRACE
    elif method == METHOD_SQRT:
        moment, trace = run_square_root(norm_game, cfg, symmetric)
        method_used = METHOD_SQRT
    else:
        moment, trace = run_diagonal_gap(norm_game, cfg, symmetric)
        method_used = METHOD_DIAGGAP

    profile = recovery.extract_profile(moment)
    spec = spectral.eigendecompose(moment.inner, m=norm_game.m)
    if spec.rank == 2:
        try:
            if symmetric:
                outcome = recovery.recover_rank2_symmetric(norm_game, moment)
            else:
                outcome = recovery.recover_rank2(norm_game, moment)
            if outcome.eps < evaluate_epsilon(norm_game, profile).eps:
                profile = outcome.profile
        except (FactorizationError, InputError):
            pass  # fall back to the last-column profile

    report = evaluate_epsilon(norm_game, profile)
    cert = recovery.certify_bounds(norm_game, moment)
    return NashResult(
        profile, report, cert, trace, gclass, method_used, moment, record
    )
