"""Moment-matrix relaxations of the Nash problem as standard-form conic programs.

The decision variable is the (m+n+1)-square symmetric matrix

    M' = [ X  P  x ]
         [ Z  Y  y ]      with P = Z^T,
         [ x' y' 1 ]

whose rank-1 feasible points encode exact equilibria.  ``build`` assembles the
constraint families selected by ``ModelOptions`` as symmetric coefficient
matrices, one linear functional per row.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import spectral
from .errors import DimensionError, InputError
from .games import BimatrixGame, StrategyProfile

# Constraint family labels used in ConicProblem and ResidualReport.
CORNER = "corner"
UNITY = "unity"
RELAXED_NASH_A = "relaxed_nash_a"
RELAXED_NASH_B = "relaxed_nash_b"
ROW_X = "row_x"
ROW_Y = "row_y"
CE_A = "correlated_eq_a"
CE_B = "correlated_eq_b"
DISTRIBUTION = "distribution"
MCCORMICK = "mccormick"
NONNEG = "nonneg"

NONNEG_FULL = "full"
NONNEG_LAST_COLUMN = "last_column"


@dataclass(frozen=True)
class Objective:
    """Objective selector; ``matrix``/``vector``/``subset`` depend on ``kind``."""

    kind: str
    vector: np.ndarray | None = None
    matrix: np.ndarray | None = None
    subset: tuple[tuple[int, ...], tuple[int, ...]] | None = None

    @staticmethod
    def zero() -> "Objective":
        return Objective("zero")

    @staticmethod
    def trace() -> "Objective":
        return Objective("trace")

    @staticmethod
    def weighted_diagonal(w) -> "Objective":
        w = np.asarray(w, dtype=float)
        if (w <= 0).any():
            raise InputError("diagonal weights must be positive")
        return Objective("weighted_diagonal", vector=w)

    @staticmethod
    def trace_minus_linear(v) -> "Objective":
        return Objective("trace_minus_linear", vector=np.asarray(v, dtype=float))

    @staticmethod
    def welfare() -> "Objective":
        return Objective("welfare")

    @staticmethod
    def exclusion(rows, cols) -> "Objective":
        return Objective("exclusion", subset=(tuple(rows), tuple(cols)))

    @staticmethod
    def quadratic(c) -> "Objective":
        c = np.asarray(c, dtype=float)
        return Objective("quadratic", matrix=0.5 * (c + c.T))


@dataclass(frozen=True)
class ModelOptions:
    """Constraint flags and objective for one relaxation instance."""

    relaxed_nash: bool = True
    row: bool = False
    correlated_eq: bool = False
    distribution: bool = False
    mccormick: bool = False
    symmetric: bool = False
    nonneg: str = NONNEG_FULL
    objective: Objective = field(default_factory=Objective.zero)

    @staticmethod
    def sdp1(objective: Objective | None = None, **kw) -> "ModelOptions":
        return ModelOptions(objective=objective or Objective.zero(), **kw)

    @staticmethod
    def sdp2(objective: Objective | None = None, **kw) -> "ModelOptions":
        return ModelOptions(
            row=True, correlated_eq=True, objective=objective or Objective.zero(), **kw
        )

    @staticmethod
    def sdp0(objective: Objective | None = None) -> "ModelOptions":
        return ModelOptions(
            nonneg=NONNEG_LAST_COLUMN, objective=objective or Objective.zero()
        )


@dataclass(frozen=True)
class Constraint:
    family: str
    matrix: np.ndarray  # symmetric coefficient matrix F; value is <F, M'>
    sense: str  # "=" or ">="
    rhs: float


@dataclass(frozen=True)
class ConicProblem:
    """Standard-form problem: optimize <C, M'> over PSD M' with linear rows."""

    dim: int
    constraints: tuple[Constraint, ...]
    nonneg_indices: tuple[tuple[int, int], ...]
    objective_matrix: np.ndarray  # symmetric, in the minimize sense
    maximize: bool
    game_m: int
    game_n: int
    symmetric: bool

    def count(self, family: str) -> int:
        return sum(1 for c in self.constraints if c.family == family)


@dataclass(frozen=True)
class MomentSolution:
    """A candidate M' with block accessors; always in full (m+n+1) space."""

    matrix: np.ndarray
    m: int
    n: int
    status: str = "constructed"
    objective_value: float | None = None

    def __post_init__(self):
        mat = np.asarray(self.matrix, dtype=float)
        if mat.shape != (self.m + self.n + 1,) * 2:
            raise DimensionError("moment matrix has wrong shape")
        if np.abs(mat - mat.T).max() > 1e-9:
            raise InputError("moment matrix is not symmetric within 1e-9")
        mat = 0.5 * (mat + mat.T)
        mat.setflags(write=False)
        object.__setattr__(self, "matrix", mat)

    @property
    def inner(self) -> np.ndarray:
        """The (m+n)-square block M (everything but the border)."""
        return self.matrix[:-1, :-1]

    @property
    def X(self) -> np.ndarray:
        return self.matrix[: self.m, : self.m]

    @property
    def P(self) -> np.ndarray:
        return self.matrix[: self.m, self.m : self.m + self.n]

    @property
    def Z(self) -> np.ndarray:
        return self.P.T

    @property
    def Y(self) -> np.ndarray:
        return self.matrix[self.m : self.m + self.n, self.m : self.m + self.n]

    @property
    def x(self) -> np.ndarray:
        return self.matrix[: self.m, -1]

    @property
    def y(self) -> np.ndarray:
        return self.matrix[self.m : self.m + self.n, -1]


def _sym(g: np.ndarray) -> np.ndarray:
    return 0.5 * (g + g.T)


def _fold(g: np.ndarray, m: int) -> np.ndarray:
    """Project a full-space (2m+1) coefficient matrix onto the identified
    symmetric-variable space (m+1), where x = y and X = P = Z = Y."""
    idx = np.concatenate([np.arange(m), np.arange(m), [m]])
    out = np.zeros((m + 1, m + 1))
    np.add.at(out, (idx[:, None], idx[None, :]), g)
    return out


def _objective_raw(game: BimatrixGame, obj: Objective) -> tuple[np.ndarray, bool]:
    """Full-space raw coefficient matrix G (value = sum G_ij M_ij) and a
    maximize flag."""
    m, n = game.m, game.n
    nn = m + n + 1
    g = np.zeros((nn, nn))
    maximize = False
    if obj.kind == "zero":
        pass
    elif obj.kind == "trace":
        g[np.arange(m + n), np.arange(m + n)] = 1.0
    elif obj.kind == "weighted_diagonal":
        if len(obj.vector) != m + n:
            raise DimensionError("weight vector must have length m+n")
        g[np.arange(m + n), np.arange(m + n)] = obj.vector
    elif obj.kind == "trace_minus_linear":
        if len(obj.vector) != m + n:
            raise DimensionError("linear vector must have length m+n")
        g[np.arange(m + n), np.arange(m + n)] = 1.0
        g[: m + n, -1] -= obj.vector
    elif obj.kind == "welfare":
        g[:m, m : m + n] = game.a + game.b
        maximize = True
    elif obj.kind == "exclusion":
        rows, cols = obj.subset
        if not rows and not cols:
            raise InputError("exclusion set must be nonempty")
        if any(i < 0 or i >= m for i in rows) or any(j < 0 or j >= n for j in cols):
            raise InputError("exclusion set index out of range")
        for i in rows:
            g[i, -1] += 1.0
        for j in cols:
            g[m + j, -1] += 1.0
    elif obj.kind == "quadratic":
        if obj.matrix.shape != (nn, nn):
            raise DimensionError("quadratic objective matrix must be (m+n+1)-square")
        g = obj.matrix.copy()
    else:
        raise InputError(f"unknown objective kind {obj.kind!r}")
    return g, maximize


def build(game: BimatrixGame, options: ModelOptions) -> ConicProblem:
    """Assemble the selected relaxation for a normalized game."""
    m, n = game.m, game.n
    if options.symmetric:
        if m != n or np.abs(game.b - game.a.T).max() > 1e-9:
            raise InputError("symmetric model requires B = A^T")
        return _build_symmetric(game, options)
    a, b = game.a, game.b
    nn = m + n + 1
    cons: list[Constraint] = []

    def add(family, g, sense, rhs):
        cons.append(Constraint(family, _sym(g), sense, float(rhs)))

    g = np.zeros((nn, nn))
    g[-1, -1] = 1.0
    add(CORNER, g, "=", 1.0)

    g = np.zeros((nn, nn))
    g[:m, -1] = 1.0
    add(UNITY, g, "=", 1.0)
    g = np.zeros((nn, nn))
    g[m : m + n, -1] = 1.0
    add(UNITY, g, "=", 1.0)

    if options.relaxed_nash:
        for i in range(m):
            g = np.zeros((nn, nn))
            g[:m, m : m + n] = a
            g[m : m + n, -1] -= a[i, :]
            add(RELAXED_NASH_A, g, ">=", 0.0)
        for j in range(n):
            g = np.zeros((nn, nn))
            g[:m, m : m + n] = b
            g[:m, -1] -= b[:, j]
            add(RELAXED_NASH_B, g, ">=", 0.0)

    if options.row:
        for i in range(m):
            g = np.zeros((nn, nn))
            g[i, :m] = 1.0
            g[i, -1] -= 1.0
            add(ROW_X, g, "=", 0.0)
            g = np.zeros((nn, nn))
            g[i, m : m + n] = 1.0
            g[i, -1] -= 1.0
            add(ROW_X, g, "=", 0.0)
        for j in range(n):
            g = np.zeros((nn, nn))
            g[m + j, m : m + n] = 1.0
            g[m + j, -1] -= 1.0
            add(ROW_Y, g, "=", 0.0)
            g = np.zeros((nn, nn))
            g[m + j, :m] = 1.0
            g[m + j, -1] -= 1.0
            add(ROW_Y, g, "=", 0.0)

    if options.correlated_eq:
        # Rows with i == k are identically 0 >= 0 and are omitted.
        for i in range(m):
            for k in range(m):
                if i == k:
                    continue
                g = np.zeros((nn, nn))
                g[i, m : m + n] = a[i, :] - a[k, :]
                add(CE_A, g, ">=", 0.0)
        for j in range(n):
            for k in range(n):
                if j == k:
                    continue
                g = np.zeros((nn, nn))
                g[:m, m + j] = b[:, j] - b[:, k]
                add(CE_B, g, ">=", 0.0)

    if options.distribution:
        for rows, colsl in (((0, m), (0, m)), ((0, m), (m, m + n)), ((m, m + n), (m, m + n))):
            g = np.zeros((nn, nn))
            g[rows[0] : rows[1], colsl[0] : colsl[1]] = 1.0
            add(DISTRIBUTION, g, "=", 1.0)

    if options.mccormick:
        for i in range(m + n):
            for j in range(m + n):
                g = np.zeros((nn, nn))
                g[i, -1] = 1.0
                g[i, j] -= 1.0
                add(MCCORMICK, g, ">=", 0.0)
                g = np.zeros((nn, nn))
                g[i, j] = 1.0
                g[i, -1] -= 1.0
                g[j, -1] -= 1.0
                add(MCCORMICK, g, ">=", -1.0)

    nonneg = _nonneg_indices(nn, m + n, options.nonneg)
    cmat, maximize = _objective_raw(game, options.objective)
    cmat = _sym(cmat)
    if maximize:
        cmat = -cmat
    return ConicProblem(
        dim=nn,
        constraints=tuple(cons),
        nonneg_indices=nonneg,
        objective_matrix=cmat,
        maximize=maximize,
        game_m=m,
        game_n=n,
        symmetric=False,
    )


def _nonneg_indices(dim: int, inner: int, mode: str) -> tuple[tuple[int, int], ...]:
    if mode == NONNEG_FULL:
        return tuple((i, j) for i in range(dim) for j in range(i, dim))
    if mode == NONNEG_LAST_COLUMN:
        return tuple((i, dim - 1) for i in range(inner))
    raise InputError(f"unknown nonnegativity mode {mode!r}")


def _build_symmetric(game: BimatrixGame, options: ModelOptions) -> ConicProblem:
    """Compact model for symmetric games: one shared x block and X block.

    Player B's constraint families coincide with player A's after the
    identification, so only the A-side rows are emitted.
    """
    m = game.m
    a = game.a
    nn = m + 1
    cons: list[Constraint] = []

    def add(family, g, sense, rhs):
        cons.append(Constraint(family, _sym(g), sense, float(rhs)))

    g = np.zeros((nn, nn))
    g[-1, -1] = 1.0
    add(CORNER, g, "=", 1.0)

    g = np.zeros((nn, nn))
    g[:m, -1] = 1.0
    add(UNITY, g, "=", 1.0)

    if options.relaxed_nash:
        for i in range(m):
            g = np.zeros((nn, nn))
            g[:m, :m] = a
            g[:m, -1] -= a[i, :]
            add(RELAXED_NASH_A, g, ">=", 0.0)

    if options.row:
        for i in range(m):
            g = np.zeros((nn, nn))
            g[i, :m] = 1.0
            g[i, -1] -= 1.0
            add(ROW_X, g, "=", 0.0)

    if options.correlated_eq:
        for i in range(m):
            for k in range(m):
                if i == k:
                    continue
                g = np.zeros((nn, nn))
                g[i, :m] = a[i, :] - a[k, :]
                add(CE_A, g, ">=", 0.0)

    if options.distribution:
        g = np.zeros((nn, nn))
        g[:m, :m] = 1.0
        add(DISTRIBUTION, g, "=", 1.0)

    if options.mccormick:
        for i in range(m):
            for j in range(m):
                g = np.zeros((nn, nn))
                g[i, -1] = 1.0
                g[i, j] -= 1.0
                add(MCCORMICK, g, ">=", 0.0)
                g = np.zeros((nn, nn))
                g[i, j] = 1.0
                g[i, -1] -= 1.0
                g[j, -1] -= 1.0
                add(MCCORMICK, g, ">=", -1.0)

    nonneg = _nonneg_indices(nn, m, options.nonneg)
    cmat_full, maximize = _objective_raw(game, options.objective)
    cmat = _sym(_fold(cmat_full, m))
    if maximize:
        cmat = -cmat
    return ConicProblem(
        dim=nn,
        constraints=tuple(cons),
        nonneg_indices=nonneg,
        objective_matrix=cmat,
        maximize=maximize,
        game_m=m,
        game_n=m,
        symmetric=True,
    )


def expand_symmetric(compact: np.ndarray, m: int) -> np.ndarray:
    """Lift a compact (m+1) symmetric-model matrix to full (2m+1) block form."""
    x_blk = compact[:m, :m]
    x = compact[:m, -1]
    out = np.empty((2 * m + 1, 2 * m + 1))
    out[:m, :m] = x_blk
    out[:m, m : 2 * m] = x_blk
    out[m : 2 * m, :m] = x_blk
    out[m : 2 * m, m : 2 * m] = x_blk
    out[: 2 * m, -1] = np.concatenate([x, x])
    out[-1, : 2 * m] = out[: 2 * m, -1]
    out[-1, -1] = compact[-1, -1]
    return out


@dataclass(frozen=True)
class ResidualReport:
    """Worst violation per constraint family plus the minimum eigenvalue."""

    families: dict
    min_eigenvalue: float

    @property
    def max_violation(self) -> float:
        return max(self.families.values(), default=0.0)

    def feasible(self, tol: float) -> bool:
        return self.max_violation <= tol and self.min_eigenvalue >= -tol


def residuals(problem: ConicProblem, matrix: np.ndarray) -> ResidualReport:
    """Exact evaluation of every functional of ``problem`` at ``matrix``."""
    mat = np.asarray(matrix, dtype=float)
    if mat.shape != (problem.dim, problem.dim):
        raise DimensionError("matrix dimension does not match problem")
    fams: dict[str, float] = {}
    for c in problem.constraints:
        val = float(np.sum(c.matrix * mat))
        viol = abs(val - c.rhs) if c.sense == "=" else max(0.0, c.rhs - val)
        fams[c.family] = max(fams.get(c.family, 0.0), viol)
    neg = 0.0
    for i, j in problem.nonneg_indices:
        neg = max(neg, -min(0.0, mat[i, j]))
    fams[NONNEG] = neg
    return ResidualReport(fams, spectral.min_eigenvalue(mat))


def rank1_embed(profile: StrategyProfile) -> MomentSolution:
    """The rank-1 matrix [x; y; 1][x; y; 1]^T."""
    v = np.concatenate([profile.x, profile.y, [1.0]])
    return MomentSolution(np.outer(v, v), len(profile.x), len(profile.y))
