"""Three-asset coverage on the equal-excess-return family.

When every asset carries the same excess return, the price of risk is parallel
to sigma^-1 1 and the budget-hyperplane algebra collapses exactly as in the
single-asset case, so every closed-form cross-identity must hold to machine
precision for any volatility matrix.  This exercises the N > 1 linear-algebra
paths of all four solvers with full value verification.
"""

import numpy as np
import pytest

import barrieropt as bo
from barrieropt import ExitSide, SimConfig
from conftest import random_sigma


@pytest.fixture(scope="module")
def dm3():
    # equal excess 0.07 with r + c_net = -0.05 puts every solver on its
    # budget-constrained branch: the goal split needs excess/2 <= |r + c_net|
    # <= excess, and with singular values in [0.1, 0.45] the precision mass K
    # stays above 14.8, so D = excess * K > 1
    rng = np.random.default_rng(33)
    sigma = random_sigma(rng, 3)
    spec = bo.MarketSpec(r=0.01, c_net=-0.06, mu=0.01 + 0.07 * np.ones(3), sigma=sigma)
    dm = bo.build_derived(spec)
    assert dm.D >= 1.0
    return dm


class TestGoalThreeAssets:
    def test_constrained_identities(self, dm3):
        sol = bo.solve_goal(dm3, dm3.r, dm3.c_net, 1.0, 2.0)
        assert sol.case is bo.GoalCase.CONSTRAINED
        assert abs(float(sol.w_star.sum()) - 1.0) <= 1e-9
        assert sol.nu_star.nu1 < 0.0
        gap = bo.support_delta(sol.nu_star) + float(sol.w_star @ sol.nu_star.vector(3))
        assert abs(gap) <= 1e-12

    def test_oracle_identity(self, dm3):
        sol = bo.solve_goal(dm3, dm3.r, dm3.c_net, 1.0, 2.0)
        for x in (1.1, 1.5, 1.9):
            oracle = bo.analytic_two_barrier_probability(
                sol.wealth.log_drift, sol.wealth.log_vol, x, 1.0, 2.0)
            assert bo.goal_value(sol, x) == pytest.approx(oracle, rel=1e-10)

    def test_hjb_residual(self, dm3):
        sol = bo.solve_goal(dm3, dm3.r, dm3.c_net, 1.0, 2.0)
        for x in (1.2, 1.5, 1.8):
            assert abs(bo.goal_hjb_residual(sol, dm3, dm3.r, dm3.c_net, x)) <= 1e-9

    def test_wealth_matches_branch_formula(self, dm3):
        # constrained drift collapses to r + c_net + D/K - 1/(2K) on this family
        sol = bo.solve_goal(dm3, dm3.r, dm3.c_net, 1.0, 2.0)
        expected = dm3.r + dm3.c_net + dm3.D / dm3.K - 0.5 / dm3.K
        assert sol.wealth.log_drift == pytest.approx(expected, rel=1e-12)
        # the scaling of w* against ||zeta_nu*|| = |alpha|/sqrt(K) cancels
        assert sol.wealth.log_vol == pytest.approx(1.0 / np.sqrt(dm3.K), rel=1e-12)


class TestTimeThreeAssets:
    def test_boundary_strategy(self, dm3):
        sol = bo.solve_time(dm3, dm3.r, dm3.c_net)
        assert sol.case is bo.TimeCase.BOUNDARY
        assert abs(float(sol.w_star.sum()) - 1.0) <= 1e-9
        assert sol.beta_star == pytest.approx(sol.wealth.log_drift, rel=1e-12)
        expected = dm3.r + dm3.c_net - 0.5 / dm3.K + dm3.D / dm3.K
        assert sol.beta_star == pytest.approx(expected, rel=1e-12)

    def test_value_and_residual(self, dm3):
        sol = bo.solve_time(dm3, dm3.r, dm3.c_net)
        if sol.regime is bo.TimeRegime.REACH:
            value = bo.reach_value(sol, 1.5, 2.0)
            oracle = bo.analytic_expected_exit_time(
                sol.wealth.log_drift, 1.5, 2.0, ExitSide.UPPER)
            barrier = 2.0
        else:
            value = bo.survival_value(sol, 1.5, 1.0)
            oracle = bo.analytic_expected_exit_time(
                sol.wealth.log_drift, 1.5, 1.0, ExitSide.LOWER)
            barrier = 1.0
        assert value == pytest.approx(oracle, rel=1e-12)
        assert abs(bo.time_hjb_residual(sol, dm3, dm3.r, dm3.c_net, 1.5, barrier)) <= 1e-9


class TestRewardThreeAssets:
    def test_constrained_reward_chain(self, dm3):
        # pick a discount small enough for the constrained root to stay in (-1, 0)
        rho = 0.5 * (dm3.r + dm3.c_net + dm3.D / dm3.K)
        sol = bo.solve_reward_max(dm3, dm3.r, dm3.c_net, rho, 2.0)
        assert sol.case is bo.RewardCase.CONSTRAINED
        assert abs(float(sol.w_star.sum()) - 1.0) <= 1e-9
        zeta_nu = bo.shifted_price_of_risk(dm3, sol.nu_star)
        assert float(zeta_nu @ zeta_nu) == pytest.approx(
            (sol.d + 1.0) ** 2 / dm3.K, rel=1e-10)
        for x in (1.2, 1.6, 1.95):
            oracle = bo.analytic_laplace_hitting(
                sol.wealth.log_drift, sol.wealth.log_vol, x, 2.0, ExitSide.UPPER, rho)
            assert bo.discounted_value(sol, x) == pytest.approx(oracle, rel=1e-10)
            assert abs(bo.reward_hjb_residual(sol, dm3, dm3.r, dm3.c_net, x)) <= 1e-9

    def test_monte_carlo_agreement(self, dm3):
        rho = 0.5 * (dm3.r + dm3.c_net + dm3.D / dm3.K)
        sol = bo.solve_reward_max(dm3, dm3.r, dm3.c_net, rho, 2.0)
        est = bo.estimate_discounted_reward(
            sol.wealth, 1.5, 2.0, ExitSide.UPPER, rho,
            SimConfig(n_paths=8000, dt=1e-3, horizon=500.0, seed=21))
        assert abs(est.mean - bo.discounted_value(sol, 1.5)) <= 3.0 * est.std_error


class TestDominanceThreeAssets:
    def test_budget_hyperplane_equality(self, dm3):
        sol = bo.solve_time(dm3, dm3.r, dm3.c_net)
        res = bo.pathwise_dominance_check(
            dm3, dm3.r, dm3.c_net, sol.nu_star, sol.w_star,
            SimConfig(n_paths=300, dt=0.01, horizon=2.0, seed=12))
        assert res.dominates and res.equality
