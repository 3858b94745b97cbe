"""Exact ground truth for small games via support enumeration.

For every equal-size support pair the indifference linear system is solved
and the candidate checked for nonnegativity and best-response optimality.
On nondegenerate games this enumerates all extreme equilibria; degenerate
games are flagged rather than handled exhaustively.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .errors import InputError
from .games import BimatrixGame, StrategyProfile

MAX_SIZE = 12  # complexity guard on each dimension
SINGULAR_TOL = 1e-10
SUPPORT_TOL = 1e-8
DEDUP_TOL = 1e-8


@dataclass(frozen=True)
class ExtremeEquilibriumSet:
    equilibria: tuple[StrategyProfile, ...]
    degenerate: bool

    def __len__(self) -> int:
        return len(self.equilibria)

    def __iter__(self):
        return iter(self.equilibria)


def _solve_support(payoff: np.ndarray, k: int):
    """Solve [payoff, -1; 1, 0] (w, v) = (0, 1) for a support of size k.

    Returns (w, value) or None when the system is numerically singular.
    """
    lhs = np.zeros((k + 1, k + 1))
    lhs[:k, :k] = payoff
    lhs[:k, k] = -1.0
    lhs[k, :k] = 1.0
    rhs = np.zeros(k + 1)
    rhs[k] = 1.0
    try:
        sv = np.linalg.svd(lhs, compute_uv=False)
        if sv[-1] < SINGULAR_TOL * max(sv[0], 1.0):
            return None
        sol = np.linalg.solve(lhs, rhs)
    except np.linalg.LinAlgError:
        return None
    return sol[:k], float(sol[k])


def support_enumeration(
    game: BimatrixGame, max_size: int | None = None
) -> ExtremeEquilibriumSet:
    """Enumerate extreme Nash equilibria over equal-size support pairs."""
    m, n = game.m, game.n
    if m > MAX_SIZE or n > MAX_SIZE:
        raise InputError(f"oracle limited to games up to {MAX_SIZE}x{MAX_SIZE}")
    limit = min(m, n) if max_size is None else min(max_size, m, n)
    a, b = game.a, game.b
    found: list[tuple[np.ndarray, np.ndarray]] = []
    degenerate = False

    for k in range(1, limit + 1):
        for rows in itertools.combinations(range(m), k):
            for cols in itertools.combinations(range(n), k):
                ri = np.array(rows)
                ci = np.array(cols)
                # y makes player A indifferent across the row support.
                res_y = _solve_support(a[np.ix_(ri, ci)], k)
                res_x = _solve_support(b[np.ix_(ri, ci)].T, k)
                if res_y is None or res_x is None:
                    degenerate = True
                    continue
                y_s, va = res_y
                x_s, vb = res_x
                if y_s.min() < -SUPPORT_TOL or x_s.min() < -SUPPORT_TOL:
                    continue
                if k > 1 and (
                    y_s.min() < SUPPORT_TOL or x_s.min() < SUPPORT_TOL
                ):
                    degenerate = True
                    continue
                x = np.zeros(m)
                x[ri] = np.maximum(x_s, 0.0)
                y = np.zeros(n)
                y[ci] = np.maximum(y_s, 0.0)
                # Best-response optimality outside the supports.
                if (a @ y).max() > va + SUPPORT_TOL:
                    continue
                if (x @ b).max() > vb + SUPPORT_TOL:
                    continue
                found.append((x / x.sum(), y / y.sum()))

    unique: list[tuple[np.ndarray, np.ndarray]] = []
    for x, y in found:
        if not any(
            np.abs(x - ux).max() <= DEDUP_TOL and np.abs(y - uy).max() <= DEDUP_TOL
            for ux, uy in unique
        ):
            unique.append((x, y))
    profiles = tuple(StrategyProfile(x, y) for x, y in unique)
    return ExtremeEquilibriumSet(profiles, degenerate)


def max_welfare_exact(game: BimatrixGame) -> float:
    """Maximum welfare over extreme equilibria (sufficient for all equilibria)."""
    eqs = support_enumeration(game)
    if not eqs.equilibria:
        raise InputError("no equilibria enumerated (degenerate game?)")
    total = game.a + game.b
    return max(float(p.x @ total @ p.y) for p in eqs)


def is_persistent_exact(game: BimatrixGame, subset) -> bool:
    """True iff every enumerated extreme equilibrium puts mass on the set.

    ``subset`` is a pair (row indices, column indices), 0-based.
    """
    rows, cols = subset
    rows, cols = tuple(rows), tuple(cols)
    if not rows and not cols:
        raise InputError("strategy set must be nonempty")
    if any(i < 0 or i >= game.m for i in rows) or any(
        j < 0 or j >= game.n for j in cols
    ):
        raise InputError("strategy set index out of range")
    eqs = support_enumeration(game)
    if not eqs.equilibria:
        raise InputError("no equilibria enumerated (degenerate game?)")
    for p in eqs:
        mass = sum(p.x[i] for i in rows) + sum(p.y[j] for j in cols)
        if mass <= SUPPORT_TOL:
            return False
    return True
