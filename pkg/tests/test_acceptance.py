"""End-to-end acceptance suite.

Shared corpora are computed once per session; every solver output they
produce is pooled so the bound-validity and structural-identity checks run
over the whole suite.  Each criterion prints a single PASS/FAIL line.
"""

import time

import numpy as np
import pytest

import nashsdp as ns
from nashsdp import (
    BimatrixGame,
    ModelOptions,
    MomentSolution,
    Objective,
    StrategyProfile,
)
from nashsdp.applications import sdp2_value
from nashsdp.backend import NEAR_OPTIMAL, OPTIMAL


def verdict(num: int, name: str, ok: bool, detail: str = "") -> None:
    tail = f"  [{detail}]" if detail else ""
    line = f"[criterion {num:2d}] {'PASS' if ok else 'FAIL'}  {name}{tail}"
    print(line)
    assert ok, line


def solve_moment(game, options) -> MomentSolution:
    problem = ns.build(game, options)
    sol = ns.solve(problem)
    assert sol.status in (OPTIMAL, NEAR_OPTIMAL), sol.status
    return MomentSolution(sol.matrix, game.m, game.n, sol.status, sol.objective_value)


# ---------------------------------------------------------------------------
# Shared corpora


@pytest.fixture(scope="session")
def pool():
    """(game, moment) pairs pooled across the corpora for criteria 5 and 6."""
    return []


@pytest.fixture(scope="session")
def strictly_competitive_runs(pool):
    runs = []
    t0 = time.perf_counter()
    for seed in range(20):
        rng = np.random.default_rng(10_000 + seed)
        a = rng.random((5, 5))
        game = BimatrixGame(a, 1.0 - a)
        res = ns.solve_nash(game, method="trace")
        norm_game, _ = ns.normalize(game)
        runs.append(res)
        pool.append((norm_game, res.solution))
    return runs, time.perf_counter() - t0


@pytest.fixture(scope="session")
def zero_sum_points(pool):
    points = []
    for seed in range(20):
        rng = np.random.default_rng(20_000 + seed)
        a = rng.random((5, 5))
        game = BimatrixGame(a, -a)
        for _ in range(5):
            c = rng.standard_normal((11, 11))
            moment = solve_moment(
                game, ModelOptions.sdp2(objective=Objective.quadratic(c + c.T))
            )
            points.append((game, moment))
            pool.append((game, moment))
    return points


@pytest.fixture(scope="session")
def heuristic_runs_5x5(pool):
    runs = {"sqrt": [], "diaggap": []}
    for method in runs:
        for seed in range(30):
            game = ns.random_game(5, 5, 30_000 + seed)
            res = ns.solve_nash(game, method=method)
            runs[method].append(res)
            pool.append((ns.normalize(game)[0], res.solution))
    return runs


@pytest.fixture(scope="session")
def heuristic_runs_20x20(pool):
    runs = []
    for seed in range(10):
        game = ns.random_game(20, 20, 40_000 + seed)
        res = ns.solve_nash(game, method="sqrt")
        runs.append(res)
        pool.append((ns.normalize(game)[0], res.solution))
    return runs


def nondegenerate_games(start_seed, count, m=5, n=5, min_equilibria=1):
    games = []
    seed = start_seed
    while len(games) < count:
        game = ns.random_game(m, n, seed)
        eqs = ns.support_enumeration(game)
        if not eqs.degenerate and len(eqs) >= min_equilibria:
            games.append((seed, game, eqs))
        seed += 1
    return games


@pytest.fixture(scope="session")
def rank2_mixtures():
    """Convex combinations of rank-1 embeddings of two distinct oracle
    equilibria; regenerated until 50 rank-2 instances are collected."""
    out = []
    for m, start in ((3, 50_000), (4, 60_000)):
        seed = start
        while len(out) < 25 * (1 if m == 3 else 2):
            game = ns.random_game(m, m, seed)
            seed += 1
            eqs = ns.support_enumeration(game)
            if eqs.degenerate or len(eqs) < 2:
                continue
            rng = np.random.default_rng(seed)
            e1, e2 = eqs.equilibria[0], eqs.equilibria[1]
            lam = rng.uniform(0.1, 0.9)
            mat = lam * ns.rank1_embed(e1).matrix + (1 - lam) * ns.rank1_embed(
                e2
            ).matrix
            moment = MomentSolution(mat, m, m)
            if ns.eigendecompose(moment.inner, m=m).rank != 2:
                continue
            out.append((game, moment))
    return out


@pytest.fixture(scope="session")
def symmetric_rank2_mixtures():
    out = []
    for k in range(50):
        rng = np.random.default_rng(70_000 + k)
        a = rng.uniform(0.0, 0.5, (4, 4))
        np.fill_diagonal(a, rng.uniform(0.8, 1.0, 4))
        game = BimatrixGame(a, a.T)  # coordination: each (e_i, e_i) is a NE
        i, j = rng.choice(4, size=2, replace=False)
        lam = rng.uniform(0.1, 0.9)
        mat = lam * ns.rank1_embed(StrategyProfile.pure(i, 4, i, 4)).matrix + (
            1 - lam
        ) * ns.rank1_embed(StrategyProfile.pure(j, 4, j, 4)).matrix
        out.append((game, MomentSolution(mat, 4, 4)))
    return out


@pytest.fixture(scope="session")
def welfare_batch(pool):
    batch = []
    for seed, game, eqs in nondegenerate_games(80_000, 20):
        wb = ns.welfare_upper_bound(game, oracle_check=False)
        exact_value = max(float(p.x @ (game.a + game.b) @ p.y) for p in eqs)
        batch.append((game, wb, exact_value))
        pool.append((game, wb.solution))
    return batch


@pytest.fixture(scope="session")
def exclusion_batch():
    cases = []
    for seed, game, eqs in nondegenerate_games(90_000, 10):
        for i in range(game.m):
            sets = (((i,), ()), ((), (i,)))
            for subset in sets:
                v = ns.exclusion_value(game, subset)
                truth = all(
                    sum(p.x[k] for k in subset[0]) + sum(p.y[k] for k in subset[1])
                    > 1e-8
                    for p in eqs
                )
                cases.append((v, truth))
    return cases


# ---------------------------------------------------------------------------
# Criteria


def test_criterion_1_strictly_competitive_exactness(strictly_competitive_runs):
    runs, elapsed = strictly_competitive_runs
    worst_eps = max(r.report.eps for r in runs)
    worst_ratio = 0.0
    for r in runs:
        vals = np.linalg.eigvalsh(r.solution.matrix)[::-1]
        worst_ratio = max(worst_ratio, vals[1] / vals[0])
    ok = worst_eps <= 1e-6 and worst_ratio <= 1e-6 and elapsed < 60.0
    verdict(
        1,
        "strictly-competitive games solved exactly by a single trace solve",
        ok,
        f"max eps {worst_eps:.2e}, max lambda2/lambda1 {worst_ratio:.2e}, "
        f"{elapsed:.1f}s",
    )


def test_criterion_2_zero_sum_feasibility_exactness(zero_sum_points):
    worst = 0.0
    for game, moment in zero_sum_points:
        prof = ns.extract_profile(moment)
        worst = max(worst, ns.evaluate_epsilon(game, prof).eps)
    verdict(
        2,
        "every feasible point of a zero-sum relaxation is an exact equilibrium",
        worst <= 1e-6,
        f"100 points, max eps {worst:.2e}",
    )


def test_criterion_3_heuristic_quality(heuristic_runs_5x5, heuristic_runs_20x20):
    sqrt_eps = [r.report.eps for r in heuristic_runs_5x5["sqrt"]]
    dg_eps = [r.report.eps for r in heuristic_runs_5x5["diaggap"]]
    big_eps = [r.report.eps for r in heuristic_runs_20x20]
    per_iter = max(
        rec.solve_time for r in heuristic_runs_20x20 for rec in r.trace.records
    )
    ok = (
        np.mean(sqrt_eps) <= 0.02
        and np.max(sqrt_eps) <= 0.12
        and np.mean(dg_eps) <= 0.02
        and np.mean(big_eps) <= 0.02
        and per_iter <= 60.0
    )
    verdict(
        3,
        "heuristic epsilon quality on random 5x5 and 20x20 batches",
        ok,
        f"sqrt mean {np.mean(sqrt_eps):.4f} max {np.max(sqrt_eps):.4f}; "
        f"diaggap mean {np.mean(dg_eps):.4f}; "
        f"20x20 mean {np.mean(big_eps):.4f}, max iter {per_iter:.1f}s",
    )


def test_criterion_4_monotonicity(heuristic_runs_5x5, heuristic_runs_20x20):
    worst_increase = -np.inf
    worst_sqrt_floor = np.inf
    worst_dg_floor = np.inf
    sqrt_runs = heuristic_runs_5x5["sqrt"] + heuristic_runs_20x20
    for r in sqrt_runs:
        seq = [rec.true_objective for rec in r.trace.records]
        worst_increase = max(
            worst_increase, max((b - a for a, b in zip(seq, seq[1:])), default=0.0)
        )
        worst_sqrt_floor = min(worst_sqrt_floor, min(seq))
    for r in heuristic_runs_5x5["diaggap"]:
        seq = [rec.true_objective for rec in r.trace.records]
        worst_increase = max(
            worst_increase, max((b - a for a, b in zip(seq, seq[1:])), default=0.0)
        )
        worst_dg_floor = min(worst_dg_floor, min(seq))
    ok = (
        worst_increase <= 1e-6
        and worst_sqrt_floor >= 2.0 - 1e-6
        and worst_dg_floor >= -1e-6
    )
    verdict(
        4,
        "true-objective sequences are monotone and respect their lower bounds",
        ok,
        f"{len(sqrt_runs) + len(heuristic_runs_5x5['diaggap'])} runs, "
        f"worst increase {worst_increase:.2e}, sqrt floor {worst_sqrt_floor:.8f}, "
        f"diaggap floor {worst_dg_floor:.2e}",
    )


def test_criterion_5_bound_validity(
    pool,
    strictly_competitive_runs,
    zero_sum_points,
    heuristic_runs_5x5,
    heuristic_runs_20x20,
    welfare_batch,
):
    worst_margin = -np.inf
    for game, moment in pool:
        prof = ns.extract_profile(moment)
        eps = ns.evaluate_epsilon(game, prof).eps
        cert = ns.certify_bounds(game, moment)
        worst_margin = max(worst_margin, eps - cert.minimum())
    verdict(
        5,
        "extracted epsilon never exceeds the certified bounds",
        worst_margin <= 1e-6,
        f"{len(pool)} solver outputs, worst eps-minus-bound {worst_margin:.2e}",
    )


def test_criterion_6_structural_identities(
    pool,
    strictly_competitive_runs,
    zero_sum_points,
    heuristic_runs_5x5,
    heuristic_runs_20x20,
    welfare_batch,
):
    ok = True
    worst = {"half": 0.0, "unit": 0.0, "gap": 0.0, "implied": 0.0}
    implied_problems = {}
    for game, moment in pool:
        m, n = game.m, game.n
        spec = ns.eigendecompose(moment.inner, m=m)
        worst["half"] = max(
            worst["half"], np.abs(spec.half_sums[:, 0] - spec.half_sums[:, 1]).max()
        )
        total = spec.values[: spec.rank] @ spec.s**2
        worst["unit"] = max(worst["unit"], abs(total - 1.0))
        _, _, gap = ns.partition_identities(spec, m, n)
        direct = moment.P - np.outer(moment.x, moment.y)
        worst["gap"] = max(worst["gap"], np.abs(gap - direct).max())
        key = (m, n)
        if key not in implied_problems:
            implied_problems[key] = ns.build(
                game,
                ModelOptions(relaxed_nash=False, distribution=True, mccormick=True),
            )
        rep = ns.residuals(implied_problems[key], moment.matrix)
        implied = max(rep.families["distribution"], rep.families["mccormick"])
        worst["implied"] = max(worst["implied"], implied)
    ok = (
        worst["half"] <= 1e-6
        and worst["unit"] <= 1e-6
        and worst["gap"] <= 1e-6
        and worst["implied"] <= 1e-7
    )
    verdict(
        6,
        "partition, unit-sum, gap double-sum, and implied-constraint identities",
        ok,
        f"{len(pool)} solutions, worst "
        f"half {worst['half']:.1e} unit {worst['unit']:.1e} "
        f"gap {worst['gap']:.1e} implied {worst['implied']:.1e}",
    )


def test_criterion_7_rank2_recovery(rank2_mixtures, symmetric_rank2_mixtures):
    worst_general = 0.0
    worst_resid = 0.0
    for game, moment in rank2_mixtures:
        out = ns.recover_rank2(game, moment)
        worst_general = max(worst_general, out.eps)
        fac = ns.cp_rank2_factorize(moment.inner, game.m, game.n)
        worst_resid = max(
            worst_resid, np.abs(fac.reconstruct() - moment.inner).max()
        )
    worst_sym = 0.0
    for game, moment in symmetric_rank2_mixtures:
        out = ns.recover_rank2_symmetric(game, moment)
        worst_sym = max(worst_sym, out.eps)
    ok = (
        worst_general <= 5.0 / 11.0 + 1e-6
        and worst_sym <= 1.0 / 3.0 + 1e-6
        and worst_resid <= 1e-6
    )
    verdict(
        7,
        "rank-2 recovery within 5/11 (general) and 1/3 (symmetric)",
        ok,
        f"{len(rank2_mixtures)}+{len(symmetric_rank2_mixtures)} instances, "
        f"worst eps {worst_general:.3f}/{worst_sym:.3f}, "
        f"CP residual {worst_resid:.1e}",
    )


def test_criterion_8_welfare(welfare_batch):
    sound = all(wb.value >= exact - 1e-6 for _, wb, exact in welfare_batch)
    exact_hits = sum(1 for _, wb, exact in welfare_batch if wb.value - exact <= 1e-4)
    rate = exact_hits / len(welfare_batch)
    ok = sound and rate >= 0.5
    verdict(
        8,
        "welfare bound sound on all games and exact on at least half",
        ok,
        f"{len(welfare_batch)} games, exact rate {rate:.0%}",
    )


def test_criterion_9_exclusion(exclusion_batch):
    false_positive = any(v.persistent and not truth for v, truth in exclusion_batch)
    correct = sum(1 for v, truth in exclusion_batch if v.persistent == truth)
    rate = correct / len(exclusion_batch)
    ok = not false_positive and rate >= 0.95
    verdict(
        9,
        "no false persistence certificates; correct verdict rate at least 95%",
        ok,
        f"{len(exclusion_batch)} singleton sets, correct rate {rate:.1%}",
    )


def test_criterion_10_level1_dominance():
    ok = True
    worst = -np.inf
    for seed in range(10):
        game = ns.random_game(4, 4, 95_000 + seed)
        rng = np.random.default_rng(seed)
        dim = game.m + game.n + 1
        for _ in range(3):
            r = rng.standard_normal((dim, dim))
            c = r.T @ r / dim  # PSD keeps the base relaxation bounded below
            lv = ns.lasserre1_value(game, c)
            ok &= not lv.unbounded and lv.value is not None
            if lv.value is not None:
                margin = lv.value - sdp2_value(game, c)
                worst = max(worst, margin)
                ok &= margin <= 1e-6
        ok &= ns.lasserre1_value(game, np.zeros((dim, dim)), maximize_welfare=True).unbounded
    verdict(
        10,
        "base relaxation never beats the strengthened one; welfare max unbounded",
        ok,
        f"30 objective pairs, worst value gap {worst:.2e}",
    )


def test_criterion_11_oracle_closed_forms():
    mp = BimatrixGame([[1.0, 0.0], [0.0, 1.0]], [[0.0, 1.0], [1.0, 0.0]])
    pd = BimatrixGame([[0.6, 0.0], [1.0, 0.2]], [[0.6, 1.0], [0.0, 0.2]])
    three = BimatrixGame([[1.0, 0.0], [0.0, 0.5]], [[0.5, 0.0], [0.0, 1.0]])

    def has(eqs, x, y):
        return any(
            np.abs(p.x - x).max() <= 1e-9 and np.abs(p.y - y).max() <= 1e-9
            for p in eqs
        )

    e_mp = ns.support_enumeration(mp)
    e_pd = ns.support_enumeration(pd)
    e3 = ns.support_enumeration(three)
    ok = (
        len(e_mp) == 1
        and has(e_mp, [0.5, 0.5], [0.5, 0.5])
        and len(e_pd) == 1
        and has(e_pd, [0.0, 1.0], [0.0, 1.0])
        and len(e3) == 3
        and has(e3, [1.0, 0.0], [1.0, 0.0])
        and has(e3, [0.0, 1.0], [0.0, 1.0])
        and has(e3, [2 / 3, 1 / 3], [1 / 3, 2 / 3])
    )
    verdict(11, "oracle reproduces the closed-form equilibrium sets", ok)
