"""SDP answers to economic questions: welfare upper bounds, strategy-exclusion
certificates, and the level-1 moment-hierarchy comparison."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import backend, model, oracle
from .backend import SolverConfig
from .errors import InputError, SolverFailure
from .games import BimatrixGame
from .model import ModelOptions, MomentSolution, Objective

# An SDP4 value above this certifies persistence; below is inconclusive.
PERSISTENCE_TOL = 1e-6

CERTIFIED_PERSISTENT = "certified_persistent"
NOT_CERTIFIED = "not_certified"


def _solve_full(game: BimatrixGame, options: ModelOptions, cfg: SolverConfig):
    problem = model.build(game, options)
    sol = backend.solve(problem, cfg)
    if sol.matrix is None:
        raise SolverFailure(f"solver returned status {sol.status}")
    return (
        MomentSolution(sol.matrix, game.m, game.n, sol.status, sol.objective_value),
        sol,
    )


@dataclass(frozen=True)
class WelfareBound:
    value: float
    solution: MomentSolution
    exact: bool | None  # None when the oracle was unavailable


def welfare_upper_bound(
    game: BimatrixGame,
    config: SolverConfig | None = None,
    oracle_check: bool = True,
    exact_gap: float = 1e-6,
) -> WelfareBound:
    """Upper bound on welfare at any Nash equilibrium (welfare over SDP2)."""
    cfg = config or SolverConfig()
    moment, sol = _solve_full(
        game, ModelOptions.sdp2(objective=Objective.welfare()), cfg
    )
    exact = None
    if oracle_check and max(game.m, game.n) <= oracle.MAX_SIZE:
        try:
            eqs = oracle.support_enumeration(game)
            if eqs.equilibria and not eqs.degenerate:
                exact = sol.objective_value <= oracle.max_welfare_exact(game) + exact_gap
        except InputError:
            exact = None
    return WelfareBound(float(sol.objective_value), moment, exact)


@dataclass(frozen=True)
class ExclusionVerdict:
    subset: tuple[tuple[int, ...], tuple[int, ...]]
    value: float
    verdict: str

    @property
    def persistent(self) -> bool:
        return self.verdict == CERTIFIED_PERSISTENT


def exclusion_value(
    game: BimatrixGame, subset, config: SolverConfig | None = None
) -> ExclusionVerdict:
    """Minimum probability mass on a strategy set over the SDP2 feasible set.

    A positive value certifies the set is played in every equilibrium; zero
    is inconclusive but never wrong on non-persistent sets.
    """
    cfg = config or SolverConfig()
    rows, cols = subset
    obj = Objective.exclusion(rows, cols)
    _, sol = _solve_full(game, ModelOptions.sdp2(objective=obj), cfg)
    value = max(0.0, float(sol.objective_value))
    verdict = CERTIFIED_PERSISTENT if value > PERSISTENCE_TOL else NOT_CERTIFIED
    return ExclusionVerdict((tuple(rows), tuple(cols)), value, verdict)


@dataclass(frozen=True)
class LasserreValue:
    status: str  # optimal | near_optimal | unbounded | ...
    value: float | None

    @property
    def unbounded(self) -> bool:
        return self.status == backend.UNBOUNDED


def lasserre1_value(
    game: BimatrixGame,
    objective_matrix: np.ndarray,
    config: SolverConfig | None = None,
    maximize_welfare: bool = False,
) -> LasserreValue:
    """Optimal value of the base relaxation (relaxed Nash + unity + last-column
    nonnegativity only) under a quadratic objective; may be unbounded."""
    cfg = config or SolverConfig()
    if maximize_welfare:
        obj = Objective.welfare()
    else:
        obj = Objective.quadratic(objective_matrix)
    problem = model.build(game, ModelOptions.sdp0(objective=obj))
    sol = backend.solve(problem, cfg)
    if sol.status in (backend.OPTIMAL, backend.NEAR_OPTIMAL):
        return LasserreValue(sol.status, float(sol.objective_value))
    return LasserreValue(sol.status, None)


def sdp2_value(
    game: BimatrixGame,
    objective_matrix: np.ndarray,
    config: SolverConfig | None = None,
) -> float:
    """Value of the strengthened relaxation under the same quadratic objective,
    for dominance comparisons against ``lasserre1_value``."""
    cfg = config or SolverConfig()
    obj = Objective.quadratic(objective_matrix)
    _, sol = _solve_full(game, ModelOptions.sdp2(objective=obj), cfg)
    return float(sol.objective_value)
