"""Bimatrix games: representation, normalization, classification, epsilon evaluation.

All downstream code assumes payoff entries in [0, 1]; ``normalize`` maps an
arbitrary finite game into that box with an invertible affine record.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, InputError

# Tolerance for clamping tiny negative probabilities; larger violations are errors.
PROB_TOL = 1e-9
# Residual threshold for class detection (zero-sum / strictly competitive / symmetric).
CLASS_TOL = 1e-9

ZERO_SUM = "zero_sum"
STRICTLY_COMPETITIVE = "strictly_competitive"
SYMMETRIC = "symmetric"
GENERAL = "general"


def _readonly(a) -> np.ndarray:
    out = np.array(a, dtype=float)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class BimatrixGame:
    """A two-player game given by m x n payoff matrices for players A and B."""

    a: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        a = _readonly(self.a)
        b = _readonly(self.b)
        if a.ndim != 2 or b.ndim != 2:
            raise InputError("payoff matrices must be 2-dimensional")
        if a.shape != b.shape:
            raise DimensionError(f"payoff shapes differ: {a.shape} vs {b.shape}")
        if a.shape[0] < 1 or a.shape[1] < 1:
            raise InputError("payoff matrices must be at least 1x1")
        if not (np.isfinite(a).all() and np.isfinite(b).all()):
            raise InputError("payoff matrices must have finite entries")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    @property
    def m(self) -> int:
        return self.a.shape[0]

    @property
    def n(self) -> int:
        return self.a.shape[1]

    def is_normalized(self, tol: float = 1e-12) -> bool:
        lo = min(self.a.min(), self.b.min())
        hi = max(self.a.max(), self.b.max())
        return lo >= -tol and hi <= 1 + tol


@dataclass(frozen=True)
class NormalizationRecord:
    """Affine coefficients mapping original payoffs to normalized ones.

    normalized_A = c_a * A + d_a (entrywise), and likewise for B; c_a, c_b > 0.
    """

    c_a: float
    d_a: float
    c_b: float
    d_b: float

    def invert(self, game: BimatrixGame) -> BimatrixGame:
        """Map a normalized game back to original payoffs."""
        return BimatrixGame(
            (game.a - self.d_a) / self.c_a, (game.b - self.d_b) / self.c_b
        )


def _minmax_coeffs(mat: np.ndarray) -> tuple[float, float]:
    lo, hi = float(mat.min()), float(mat.max())
    if hi - lo < 1e-15:
        # Constant matrix: strategically trivial for this player, map to zeros.
        return 1.0, -lo
    return 1.0 / (hi - lo), -lo / (hi - lo)


def normalize(game: BimatrixGame) -> tuple[BimatrixGame, NormalizationRecord]:
    """Rescale each payoff matrix independently into [0, 1] by its min-max map."""
    ca, da = _minmax_coeffs(game.a)
    cb, db = _minmax_coeffs(game.b)
    out = BimatrixGame(ca * game.a + da, cb * game.b + db)
    return out, NormalizationRecord(ca, da, cb, db)


@dataclass(frozen=True)
class StrategyProfile:
    """A pair of mixed strategies (x over rows, y over columns)."""

    x: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        x = np.array(self.x, dtype=float).ravel()
        y = np.array(self.y, dtype=float).ravel()
        for v, name in ((x, "x"), (y, "y")):
            if v.min() < -PROB_TOL:
                raise InputError(f"{name} has negative entry {v.min():.3e}")
            if abs(v.sum() - 1.0) > PROB_TOL * max(1, len(v)):
                raise InputError(f"{name} sums to {v.sum():.12f}, expected 1")
        x = np.maximum(x, 0.0)
        y = np.maximum(y, 0.0)
        x.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)

    @staticmethod
    def pure(i: int, m: int, j: int, n: int) -> "StrategyProfile":
        x = np.zeros(m)
        x[i] = 1.0
        y = np.zeros(n)
        y[j] = 1.0
        return StrategyProfile(x, y)

    @staticmethod
    def uniform(m: int, n: int) -> "StrategyProfile":
        return StrategyProfile(np.full(m, 1.0 / m), np.full(n, 1.0 / n))


@dataclass(frozen=True)
class EpsilonReport:
    """Best-response regrets of a profile: eps = max(eps_a, eps_b)."""

    eps_a: float
    eps_b: float
    eps: float
    best_response_a: int
    best_response_b: int


def evaluate_epsilon(game: BimatrixGame, profile: StrategyProfile) -> EpsilonReport:
    """Regret of each player against a fixed opponent strategy, floored at 0."""
    x, y = profile.x, profile.y
    if len(x) != game.m or len(y) != game.n:
        raise DimensionError("profile dimensions do not match game")
    payoffs_a = game.a @ y
    payoffs_b = x @ game.b
    i = int(np.argmax(payoffs_a))
    j = int(np.argmax(payoffs_b))
    eps_a = max(0.0, float(payoffs_a[i] - x @ payoffs_a))
    eps_b = max(0.0, float(payoffs_b[j] - payoffs_b @ y))
    return EpsilonReport(eps_a, eps_b, max(eps_a, eps_b), i, j)


@dataclass(frozen=True)
class GameClass:
    """Most specific detected class, with the affine witness when competitive."""

    kind: str
    witness: tuple[float, float, float, float] | None = None


def classify(game: BimatrixGame) -> GameClass:
    """Detect zero-sum, strictly competitive, or symmetric structure.

    Strictly-competitive detection fits cA + dJ = -eB + fJ by least squares
    with the gauge c = 1, and accepts when the residual is below CLASS_TOL.
    """
    a, b = game.a, game.b
    if np.abs(a + b).max() <= CLASS_TOL:
        return GameClass(ZERO_SUM, (1.0, 0.0, 1.0, 0.0))
    # Gauge c = 1: solve A + eB + gJ = 0 for (e, g); then d = 0, f = -g.
    lhs = np.column_stack([b.ravel(), np.ones(a.size)])
    (e, g), *_ = np.linalg.lstsq(lhs, -a.ravel(), rcond=None)
    if e > 0:
        resid = np.abs(a + e * b + g).max()
        if resid <= CLASS_TOL:
            return GameClass(STRICTLY_COMPETITIVE, (1.0, 0.0, float(e), float(-g)))
    if game.m == game.n and np.abs(b - a.T).max() <= CLASS_TOL:
        return GameClass(SYMMETRIC)
    return GameClass(GENERAL)


def random_game(m: int, n: int, seed: int) -> BimatrixGame:
    """Seeded random game with i.i.d. uniform [0,1) payoffs (PCG64 generator)."""
    if m < 1 or n < 1:
        raise InputError("m and n must be positive")
    rng = np.random.default_rng(seed)
    return BimatrixGame(rng.random((m, n)), rng.random((m, n)))


def transform(
    game: BimatrixGame, c: float, d: float, e: float, f: float
) -> BimatrixGame:
    """Apply the equilibrium-preserving map (A, B) -> (cA + dJ, eB + fJ)."""
    if c <= 0 or e <= 0:
        raise InputError("scale factors c and e must be positive")
    return BimatrixGame(c * game.a + d, e * game.b + f)


def game_from_json(obj) -> BimatrixGame:
    """Build a game from a parsed {"A": [[...]], "B": [[...]]} document."""
    if not isinstance(obj, dict) or "A" not in obj or "B" not in obj:
        raise InputError('game document must be an object with keys "A" and "B"')
    mats = []
    for key in ("A", "B"):
        rows = obj[key]
        if not isinstance(rows, list) or not rows or not all(
            isinstance(r, list) for r in rows
        ):
            raise InputError(f'"{key}" must be a non-empty list of rows')
        width = len(rows[0])
        if any(len(r) != width for r in rows):
            raise InputError(f'"{key}" has ragged rows')
        try:
            mats.append(np.array(rows, dtype=float))
        except (TypeError, ValueError) as exc:
            raise InputError(f'"{key}" has non-numeric entries') from exc
    return BimatrixGame(mats[0], mats[1])


def load_game(path) -> BimatrixGame:
    """Read a game from a JSON file."""
    try:
        with open(path) as fh:
            obj = json.load(fh)
    except OSError as exc:
        raise InputError(f"cannot read game file: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"malformed JSON in game file: {exc}") from exc
    return game_from_json(obj)
