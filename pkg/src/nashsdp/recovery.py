"""Profile extraction from moment solutions, certified epsilon bounds, and the
rank-2 recovery procedures (5/11 general case, 1/3 symmetric case)."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import spectral
from .errors import DimensionError, InputError, RankError
from .games import BimatrixGame, EpsilonReport, StrategyProfile, evaluate_epsilon
from .model import MomentSolution

# Profiles are accepted from solver output if simplex drift stays below this.
EXTRACT_DRIFT_TOL = 1e-7
# Case boundary of the rank-2 recovery analysis; ties route to the factor case.
CASE_THRESHOLD = 0.4

LAST_COLUMN = "last_column"
FACTOR_1 = "factor_1"
FACTOR_2 = "factor_2"
MIXED_RESPONSE = "mixed_response"
SYMMETRIC_FACTOR = "symmetric_factor"


def best_response(
    game: BimatrixGame, player: str, opponent: np.ndarray
) -> tuple[int, float]:
    """Best pure response index (ties -> lowest index) and its payoff."""
    opponent = np.asarray(opponent, dtype=float)
    if player == "A":
        if len(opponent) != game.n:
            raise DimensionError("opponent strategy must have length n")
        payoffs = game.a @ opponent
    elif player == "B":
        if len(opponent) != game.m:
            raise DimensionError("opponent strategy must have length m")
        payoffs = opponent @ game.b
    else:
        raise InputError("player must be 'A' or 'B'")
    i = int(np.argmax(payoffs))
    return i, float(payoffs[i])


def _clean_simplex(v: np.ndarray, name: str) -> np.ndarray:
    drift = max(-float(v.min()), abs(float(v.sum()) - 1.0))
    if drift > EXTRACT_DRIFT_TOL:
        raise InputError(f"{name} drifts from the simplex by {drift:.3e}")
    v = np.maximum(v, 0.0)
    return v / v.sum()


def extract_profile(solution: MomentSolution) -> StrategyProfile:
    """Last-column strategies, clamped and renormalized within drift tolerance."""
    return StrategyProfile(
        _clean_simplex(solution.x.copy(), "x"), _clean_simplex(solution.y.copy(), "y")
    )


@dataclass(frozen=True)
class BoundCertificate:
    """Certified upper bounds on the epsilon of the extracted profile."""

    l1_bound: float  # half the entrywise L1 norm of P - xy^T
    rank_k_bound: float  # (m+n)/2 times the eigenvalue tail of M
    diaggap_bound: float  # 3(m+n)/8 times (Tr(M) - x'x - y'y)
    payoff_gap_bound: float  # max approximate-vs-realized payoff gap
    eigenvalues: np.ndarray
    s: np.ndarray

    def minimum(self) -> float:
        return min(self.l1_bound, self.rank_k_bound, self.diaggap_bound)


def certify_bounds(game: BimatrixGame, solution: MomentSolution) -> BoundCertificate:
    """All epsilon bounds computable from a feasible moment solution."""
    m, n = game.m, game.n
    x, y, p = solution.x, solution.y, solution.P
    spec = spectral.eigendecompose(solution.inner, m=m)
    gap = p - np.outer(x, y)
    scale = m + n
    l1 = 0.5 * np.abs(gap).sum()
    rank_k = 0.5 * scale * spec.tail_sum
    diaggap = 3.0 * scale / 8.0 * (np.trace(solution.inner) - x @ x - y @ y)
    payoff_gap = max(
        float(np.sum(game.a * p) - x @ game.a @ y),
        float(np.sum(game.b * p) - x @ game.b @ y),
    )
    return BoundCertificate(
        max(0.0, l1),
        max(0.0, rank_k),
        max(0.0, diaggap),
        max(0.0, payoff_gap),
        spec.values.copy(),
        spec.s.copy(),
    )


@dataclass(frozen=True)
class Candidate:
    label: str
    profile: StrategyProfile
    report: EpsilonReport


@dataclass(frozen=True)
class RecoveryOutcome:
    """Candidate profiles considered during recovery and the epsilon minimizer."""

    profile: StrategyProfile
    candidates: tuple[Candidate, ...]
    case: str

    @property
    def eps(self) -> float:
        return min(c.report.eps for c in self.candidates)


def _pick(candidates: list[Candidate]) -> RecoveryOutcome:
    best = min(candidates, key=lambda c: c.report.eps)
    return RecoveryOutcome(best.profile, tuple(candidates), best.label)


def recover_rank2(game: BimatrixGame, solution: MomentSolution) -> RecoveryOutcome:
    """Recover a profile with epsilon at most 5/11 from a rank-<=2 solution.

    All candidates are evaluated and the empirical minimizer returned; the
    proof's designated candidate is among them, so the guarantee survives.
    """
    spec = spectral.eigendecompose(solution.inner, m=game.m)
    if spec.rank > 2:
        raise RankError(f"recovery requires rank <= 2, got {spec.rank}")
    base = extract_profile(solution)
    base_rep = evaluate_epsilon(game, base)
    candidates = [Candidate(LAST_COLUMN, base, base_rep)]
    if spec.rank == 1:
        return _pick(candidates)

    fac = spectral.cp_rank2_factorize(solution.inner, game.m, game.n)
    for label, xv, yv in (
        (FACTOR_1, fac.a, fac.b),
        (FACTOR_2, fac.c, fac.d),
    ):
        prof = StrategyProfile(
            _clean_simplex(xv.copy(), label), _clean_simplex(yv.copy(), label)
        )
        candidates.append(Candidate(label, prof, evaluate_epsilon(game, prof)))

    ea, eb = base_rep.eps_a, base_rep.eps_b
    thr = CASE_THRESHOLD
    if (ea <= thr) != (eb <= thr):
        # Exactly one player is far from best response: mix the other's play
        # with a pure best response so both regrets equalize.
        if eb > thr:
            p = 1.0 / (1.0 + eb - ea)
            j, _ = best_response(game, "B", base.x)
            ystar = np.zeros(game.n)
            ystar[j] = 1.0
            mixed = StrategyProfile(base.x, p * base.y + (1 - p) * ystar)
        else:
            p = 1.0 / (1.0 + ea - eb)
            i, _ = best_response(game, "A", base.y)
            xstar = np.zeros(game.m)
            xstar[i] = 1.0
            mixed = StrategyProfile(p * base.x + (1 - p) * xstar, base.y)
        candidates.append(
            Candidate(MIXED_RESPONSE, mixed, evaluate_epsilon(game, mixed))
        )
    return _pick(candidates)


def recover_rank2_symmetric(
    game: BimatrixGame, solution: MomentSolution
) -> RecoveryOutcome:
    """Recover a symmetric profile with epsilon at most 1/3 (symmetric model)."""
    if np.abs(solution.x - solution.y).max() > 1e-7:
        raise InputError("symmetric recovery requires identified x = y blocks")
    spec = spectral.eigendecompose(solution.inner, m=game.m)
    if spec.rank > 2:
        raise RankError(f"recovery requires rank <= 2, got {spec.rank}")
    xv = _clean_simplex(solution.x.copy(), "x")
    base = StrategyProfile(xv, xv)
    candidates = [Candidate(LAST_COLUMN, base, evaluate_epsilon(game, base))]
    if spec.rank == 2:
        fac = spectral.cp_rank2_factorize(solution.inner, game.m, game.n)
        for vec in (fac.a, fac.c):
            v = _clean_simplex(vec.copy(), "factor")
            prof = StrategyProfile(v, v)
            candidates.append(
                Candidate(SYMMETRIC_FACTOR, prof, evaluate_epsilon(game, prof))
            )
    return _pick(candidates)
