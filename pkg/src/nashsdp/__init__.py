"""Approximate Nash equilibria of bimatrix games via semidefinite relaxations.

The central object is a moment-matrix relaxation of the quadratic Nash
feasibility program.  Feasible points yield strategy profiles with certified
additive-epsilon bounds; iterative rank-reduction heuristics drive the
solutions toward exact equilibria, and strictly competitive games are solved
exactly.  A support-enumeration oracle provides ground truth on small games.
"""

from .applications import (
    ExclusionVerdict,
    LasserreValue,
    WelfareBound,
    exclusion_value,
    lasserre1_value,
    welfare_upper_bound,
)
from .backend import ConicSolution, SolverConfig, solve
from .errors import (
    DimensionError,
    FactorizationError,
    InputError,
    RankError,
    SolverFailure,
)
from .games import (
    BimatrixGame,
    EpsilonReport,
    GameClass,
    NormalizationRecord,
    StrategyProfile,
    classify,
    evaluate_epsilon,
    game_from_json,
    load_game,
    normalize,
    random_game,
    transform,
)
from .heuristics import (
    NashResult,
    RunConfig,
    RunTrace,
    run_diagonal_gap,
    run_square_root,
    solve_nash,
)
from .model import (
    ConicProblem,
    ModelOptions,
    MomentSolution,
    Objective,
    build,
    rank1_embed,
    residuals,
)
from .oracle import (
    ExtremeEquilibriumSet,
    is_persistent_exact,
    max_welfare_exact,
    support_enumeration,
)
from .recovery import (
    BoundCertificate,
    RecoveryOutcome,
    certify_bounds,
    extract_profile,
    recover_rank2,
    recover_rank2_symmetric,
)
from .spectral import (
    CpFactorization,
    Spectrum,
    cp_rank2_factorize,
    eigendecompose,
    partition_identities,
)

__version__ = "0.1.0"

__all__ = [
    "BimatrixGame",
    "BoundCertificate",
    "ConicProblem",
    "ConicSolution",
    "CpFactorization",
    "DimensionError",
    "EpsilonReport",
    "ExclusionVerdict",
    "ExtremeEquilibriumSet",
    "FactorizationError",
    "GameClass",
    "InputError",
    "LasserreValue",
    "ModelOptions",
    "MomentSolution",
    "NashResult",
    "NormalizationRecord",
    "Objective",
    "RankError",
    "RecoveryOutcome",
    "RunConfig",
    "RunTrace",
    "SolverConfig",
    "SolverFailure",
    "Spectrum",
    "StrategyProfile",
    "WelfareBound",
    "build",
    "certify_bounds",
    "classify",
    "cp_rank2_factorize",
    "eigendecompose",
    "evaluate_epsilon",
    "exclusion_value",
    "extract_profile",
    "game_from_json",
    "is_persistent_exact",
    "lasserre1_value",
    "load_game",
    "max_welfare_exact",
    "normalize",
    "partition_identities",
    "random_game",
    "rank1_embed",
    "recover_rank2",
    "recover_rank2_symmetric",
    "residuals",
    "run_diagonal_gap",
    "run_square_root",
    "solve",
    "solve_nash",
    "support_enumeration",
    "transform",
    "welfare_upper_bound",
]
