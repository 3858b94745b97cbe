import numpy as np
import pytest

from nashsdp import (
    BimatrixGame,
    InputError,
    RunConfig,
    random_game,
    run_diagonal_gap,
    run_square_root,
    solve_nash,
)
from nashsdp.heuristics import METHOD_DIAGGAP, METHOD_SQRT, METHOD_TRACE


class TestRunConfig:
    def test_rejects_zero_iterations(self):
        with pytest.raises(InputError):
            RunConfig(max_iterations=0)

    def test_rejects_nonpositive_tolerance(self):
        with pytest.raises(InputError):
            RunConfig(decrease_tol=0.0)


class TestSquareRoot:
    def test_true_objective_monotone_and_above_two(self):
        g = random_game(4, 4, 50)
        _, trace = run_square_root(g)
        seq = [r.true_objective for r in trace.records]
        assert all(b <= a + 1e-6 for a, b in zip(seq, seq[1:]))
        assert all(v >= 2.0 - 1e-6 for v in seq)

    def test_first_iteration_is_trace(self):
        """With unit initial weights, iteration one of the square-root loop
        coincides with a single trace-objective solve."""
        from nashsdp import ModelOptions, Objective, build, solve

        g = random_game(4, 4, 51)
        m1, _ = run_square_root(g, RunConfig(max_iterations=1))
        sol = solve(build(g, ModelOptions.sdp2(objective=Objective.trace())))
        np.testing.assert_allclose(m1.matrix, sol.matrix, atol=1e-7)

    def test_drives_epsilon_down(self):
        g = random_game(5, 5, 52)
        moment, trace = run_square_root(g)
        assert trace.records[-1].eps <= trace.records[0].eps + 1e-6


class TestDiagonalGap:
    def test_true_objective_monotone_and_nonnegative(self):
        g = random_game(4, 4, 60)
        _, trace = run_diagonal_gap(g)
        seq = [r.true_objective for r in trace.records]
        assert all(b <= a + 1e-6 for a, b in zip(seq, seq[1:]))
        assert all(v >= -1e-6 for v in seq)

    def test_converges_on_small_game(self):
        g = random_game(3, 3, 61)
        _, trace = run_diagonal_gap(g)
        assert trace.termination in ("converged", "max_iterations")
        assert trace.records[-1].eps <= 0.05


class TestSolveNash:
    def test_unknown_method(self, matching_pennies):
        with pytest.raises(InputError):
            solve_nash(matching_pennies, method="gradient")

    def test_strictly_competitive_shortcut(self, matching_pennies):
        res = solve_nash(matching_pennies, method=METHOD_SQRT)
        assert res.method == "trace:exact"
        assert res.report.eps <= 1e-6
        assert res.game_class.kind == "strictly_competitive"

    def test_zero_sum_exact(self):
        rng = np.random.default_rng(70)
        a = rng.random((4, 4))
        res = solve_nash(BimatrixGame(a, -a))
        assert res.report.eps <= 1e-6

    def test_general_game_quality(self):
        g = random_game(5, 5, 71)
        res = solve_nash(g, method=METHOD_DIAGGAP)
        assert res.report.eps <= 0.1
        assert res.report.eps <= res.certificate.minimum() + 1e-6

    def test_epsilon_recomputable_from_profile(self):
        from nashsdp import evaluate_epsilon, normalize

        g = random_game(4, 4, 72)
        res = solve_nash(g)
        ng, _ = normalize(g)
        rep = evaluate_epsilon(ng, res.profile)
        assert rep.eps == pytest.approx(res.report.eps, abs=1e-12)

    def test_symmetric_flag_rejects_asymmetric(self):
        g = random_game(3, 3, 73)
        with pytest.raises(InputError):
            solve_nash(g, symmetric=True)

    def test_symmetric_solve(self):
        rng = np.random.default_rng(74)
        a = rng.random((4, 4))
        g = BimatrixGame(a, a.T)
        res = solve_nash(g, method=METHOD_SQRT, symmetric=True)
        np.testing.assert_allclose(res.profile.x, res.profile.y, atol=1e-7)
        assert res.report.eps <= res.certificate.minimum() + 1e-6

    def test_result_carries_normalization(self):
        g = BimatrixGame([[3.0, -1.0], [0.0, 2.0]], [[5.0, 1.0], [2.0, 0.0]])
        res = solve_nash(g)
        assert res.normalization is not None
        assert res.normalization.c_a > 0
