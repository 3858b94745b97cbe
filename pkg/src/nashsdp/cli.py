"""Command-line surface: solve, welfare, exclude, oracle, and bench commands.

All documents are JSON with full-precision numbers; benchmarks write CSV.
Exit codes: 0 success, 1 input error, 2 solver failure.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import statistics
import sys
import time
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import applications, oracle
from .backend import SolverConfig
from .errors import InputError, SolverFailure
from .games import BimatrixGame, load_game, random_game
from .heuristics import METHOD_SQRT, METHODS, NashResult, RunConfig, solve_nash

SCHEMA_VERSION = 1

CSV_COLUMNS = (
    "seed",
    "m",
    "n",
    "method",
    "iters",
    "eps",
    "rank",
    "lambda2",
    "bound_rank_k",
    "bound_diaggap",
    "solve_ms",
)


def _digest(game: BimatrixGame) -> str:
    h = hashlib.sha256()
    h.update(np.ascontiguousarray(game.a).tobytes())
    h.update(np.ascontiguousarray(game.b).tobytes())
    return h.hexdigest()[:16]


def _result_document(game: BimatrixGame, result: NashResult, wall: float) -> dict:
    cert = result.certificate
    return {
        "schema_version": SCHEMA_VERSION,
        "game_digest": _digest(game),
        "method": result.method,
        "game_class": result.game_class.kind,
        "x": list(result.profile.x),
        "y": list(result.profile.y),
        "eps": result.report.eps,
        "eps_a": result.report.eps_a,
        "eps_b": result.report.eps_b,
        "rank": int(np.sum(cert.eigenvalues > 1e-6 * max(cert.eigenvalues[0], 1.0))),
        "eigenvalues": list(cert.eigenvalues),
        "bounds": {
            "l1": cert.l1_bound,
            "rank_k": cert.rank_k_bound,
            "diaggap": cert.diaggap_bound,
        },
        "iterations": result.trace.iterations,
        "trace": [
            {
                "surrogate_value": r.surrogate_value,
                "true_objective": r.true_objective,
                "eps": r.eps,
                "rank": r.rank,
                "solve_time": r.solve_time,
            }
            for r in result.trace.records
        ],
        "termination": result.trace.termination,
        "wall_time_s": wall,
    }


def _emit(doc: dict, out_path: str | None) -> None:
    text = json.dumps(doc, indent=2)
    if out_path:
        with open(out_path, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def _run_config(args) -> RunConfig:
    return RunConfig(
        max_iterations=args.iters, solver=SolverConfig.from_env()
    )


def cmd_solve(args) -> int:
    game = load_game(args.game)
    t0 = time.perf_counter()
    result = solve_nash(
        game, method=args.method, config=_run_config(args), symmetric=args.symmetric
    )
    doc = _result_document(game, result, time.perf_counter() - t0)
    _emit(doc, args.out)
    return 0


def cmd_welfare(args) -> int:
    game = load_game(args.game)
    bound = applications.welfare_upper_bound(game, config=SolverConfig.from_env())
    doc = {
        "schema_version": SCHEMA_VERSION,
        "game_digest": _digest(game),
        "welfare_upper_bound": bound.value,
        "exact": bound.exact,
    }
    _emit(doc, args.out)
    return 0


def _parse_indices(raw: str | None) -> tuple[int, ...]:
    if not raw:
        return ()
    try:
        return tuple(int(tok) for tok in raw.split(",") if tok.strip())
    except ValueError as exc:
        raise InputError(f"bad index list {raw!r}") from exc


def cmd_exclude(args) -> int:
    game = load_game(args.game)
    subset = (_parse_indices(args.rows), _parse_indices(args.cols))
    if not subset[0] and not subset[1]:
        raise InputError("at least one of --rows/--cols is required")
    verdict = applications.exclusion_value(
        game, subset, config=SolverConfig.from_env()
    )
    doc = {
        "schema_version": SCHEMA_VERSION,
        "game_digest": _digest(game),
        "rows": list(verdict.subset[0]),
        "cols": list(verdict.subset[1]),
        "value": verdict.value,
        "verdict": verdict.verdict,
    }
    _emit(doc, args.out)
    return 0


def cmd_oracle(args) -> int:
    game = load_game(args.game)
    eqs = oracle.support_enumeration(game)
    doc = {
        "schema_version": SCHEMA_VERSION,
        "game_digest": _digest(game),
        "degenerate": eqs.degenerate,
        "equilibria": [{"x": list(p.x), "y": list(p.y)} for p in eqs],
    }
    _emit(doc, args.out)
    return 0


def _bench_one(task: tuple[int, int, int, str, int]) -> dict:
    seed, m, n, method, iters = task
    game = random_game(m, n, seed)
    cfg = RunConfig(max_iterations=iters, solver=SolverConfig.from_env())
    t0 = time.perf_counter()
    result = solve_nash(game, method=method, config=cfg)
    elapsed = time.perf_counter() - t0
    cert = result.certificate
    ev = cert.eigenvalues
    return {
        "seed": seed,
        "m": m,
        "n": n,
        "method": method,
        "iters": result.trace.iterations,
        "eps": result.report.eps,
        "rank": int(np.sum(ev > 1e-6 * max(ev[0], 1.0))),
        "lambda2": float(ev[1]) if len(ev) > 1 else 0.0,
        "bound_rank_k": cert.rank_k_bound,
        "bound_diaggap": cert.diaggap_bound,
        "solve_ms": 1000.0 * elapsed,
    }


def cmd_bench(args) -> int:
    if args.m < 1 or args.n < 1 or args.count < 1:
        raise InputError("sizes and count must be positive")
    # Games are seeded as seed + index so any row can be reproduced alone.
    tasks = [
        (args.seed + k, args.m, args.n, args.method, args.iters)
        for k in range(args.count)
    ]
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            rows = list(pool.map(_bench_one, tasks))
    else:
        rows = [_bench_one(t) for t in tasks]

    if args.csv:
        try:
            fh = open(args.csv, "w", newline="")
        except OSError as exc:
            raise InputError(f"cannot write CSV: {exc}") from exc
        with fh:
            writer = csv.DictWriter(fh, fieldnames=CSV_COLUMNS)
            writer.writeheader()
            writer.writerows(rows)

    eps = [r["eps"] for r in rows]
    print(f"games: {len(eps)}  method: {args.method}  size: {args.m}x{args.n}")
    print(f"eps max:    {max(eps):.6f}")
    print(f"eps mean:   {statistics.fmean(eps):.6f}")
    print(f"eps median: {statistics.median(eps):.6f}")
    print(f"eps stdev:  {statistics.stdev(eps) if len(eps) > 1 else 0.0:.6f}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nashsdp",
        description="Approximate Nash equilibria of bimatrix games via "
        "semidefinite relaxations, with certified epsilon bounds.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="solve a game and report a profile")
    p.add_argument("--game", required=True, help="path to a JSON game file")
    p.add_argument("--method", choices=METHODS, default=METHOD_SQRT)
    p.add_argument("--iters", type=int, default=20)
    p.add_argument("--symmetric", action="store_true")
    p.add_argument("--out", default=None, help="write the JSON document here")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("welfare", help="SDP upper bound on equilibrium welfare")
    p.add_argument("--game", required=True)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_welfare)

    p = sub.add_parser("exclude", help="certify that a strategy set is played")
    p.add_argument("--game", required=True)
    p.add_argument("--rows", default=None, help="comma-separated row indices")
    p.add_argument("--cols", default=None, help="comma-separated column indices")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_exclude)

    p = sub.add_parser("oracle", help="enumerate extreme equilibria exactly")
    p.add_argument("--game", required=True)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("bench", help="run a seeded benchmark batch")
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--count", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--method", choices=METHODS, default=METHOD_SQRT)
    p.add_argument("--iters", type=int, default=20)
    p.add_argument("--csv", default=None, help="write per-game rows here")
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=cmd_bench)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except SolverFailure as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
