"""Expected-time problems: maximize time to ruin, or minimize time to a goal.

Both are solved by the budget-constrained log-optimal strategy.  Which problem
the market admits is decided by the sign of the optimal growth rate
``beta_star``: negative means wealth decays and only survival time is well
posed, positive means the goal is reached in finite expected time.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .auxiliary import (
    C2Function,
    FictitiousParam,
    GbmCoefficients,
    favourability,
    generator_apply,
    shifted_price_of_risk,
    wealth_coefficients,
)
from .errors import DomainViolation, RegimeMismatch, ZeroFavourability
from .market import DerivedMarket

BETA_ZERO_TOL = 1e-12


class TimeCase(enum.Enum):
    INTERIOR = "interior"    # log-optimal weights already satisfy the budget (D < 1)
    BOUNDARY = "boundary"    # optimum sits on the budget hyperplane (D >= 1)


class TimeRegime(enum.Enum):
    SURVIVAL = "survival"    # beta_star < 0: maximize E[time to hit L]
    REACH = "reach"          # beta_star > 0: minimize E[time to hit U]


@dataclass(frozen=True)
class TimeSolution:
    """Closed-form solution of the expected-time problem."""

    case: TimeCase
    regime: TimeRegime
    nu_star: FictitiousParam
    beta_star: float
    w_star: np.ndarray
    wealth: GbmCoefficients


def solve_time(dm: DerivedMarket, r: float, c_net: float) -> TimeSolution:
    """Constrained log-optimal strategy and its growth rate.

    Interior case when D = 1'w_o < 1 (shift zero, weights w_o); boundary case
    when D >= 1 (shift nu1 = (1 - D)/K, weights on the budget hyperplane).
    The regime follows the sign of beta_star.

    Raises:
        ZeroFavourability: |beta_star| <= 1e-12, where neither expected time
            is well posed.
    """
    if dm.D < 1.0:
        case = TimeCase.INTERIOR
        nu_star = FictitiousParam.zero()
        w_star = dm.w_o.copy()
    else:
        case = TimeCase.BOUNDARY
        nu_star = FictitiousParam((1.0 - dm.D) / dm.K)
        zeta_nu = shifted_price_of_risk(dm, nu_star)
        w_star = np.linalg.solve(dm.sigma.T, zeta_nu)

    # w_star is log-optimal in the shifted market, so the favourability
    # parameter at nu_star is exactly its wealth log-drift.
    beta_star = favourability(dm, nu_star, r, c_net)
    if abs(beta_star) <= BETA_ZERO_TOL:
        raise ZeroFavourability(f"optimal growth rate is zero (beta={beta_star})")
    regime = TimeRegime.SURVIVAL if beta_star < 0.0 else TimeRegime.REACH

    wealth = wealth_coefficients(dm, nu_star, w_star, c_net, r)
    return TimeSolution(
        case=case,
        regime=regime,
        nu_star=nu_star,
        beta_star=beta_star,
        w_star=w_star,
        wealth=wealth,
    )


def survival_value(sol: TimeSolution, x: float, L: float) -> float:
    """Maximal expected time (years) to hit L from x >= L; needs beta_star < 0."""
    if sol.regime is not TimeRegime.SURVIVAL:
        raise RegimeMismatch("survival value is defined only when beta_star < 0")
    if not (0.0 < L <= x):
        raise DomainViolation(f"need x >= L > 0, got x={x}, L={L}")
    return math.log(x / L) / abs(sol.beta_star)


def reach_value(sol: TimeSolution, x: float, U: float) -> float:
    """Minimal expected time (years) to hit U from x <= U; needs beta_star > 0."""
    if sol.regime is not TimeRegime.REACH:
        raise RegimeMismatch("reach value is defined only when beta_star > 0")
    if not (0.0 < x <= U):
        raise DomainViolation(f"need 0 < x <= U, got x={x}, U={U}")
    return math.log(U / x) / sol.beta_star


def time_value_function(sol: TimeSolution, barrier: float) -> C2Function:
    """Value function (survival or reach, by regime) with analytic derivatives."""
    beta = sol.beta_star
    if sol.regime is TimeRegime.SURVIVAL:
        scale = 1.0 / abs(beta)

        def value(x: float) -> float:
            return scale * math.log(x / barrier)

    else:
        scale = -1.0 / beta

        def value(x: float) -> float:
            return -scale * math.log(barrier / x)

    def deriv(x: float) -> float:
        return scale / x

    def deriv2(x: float) -> float:
        return -scale / (x * x)

    return C2Function(value=value, deriv=deriv, deriv2=deriv2)


def time_hjb_residual(
    sol: TimeSolution,
    dm: DerivedMarket,
    r: float,
    c_net: float,
    x: float,
    barrier: float,
) -> float:
    """Residual 1 + L^{w*} V(x) of the expected-time equation; zero at the solution.

    The reach problem is handled through the sign-flipped objective, which
    lands on the same residual expression.
    """
    if x <= 0.0 or (sol.regime is TimeRegime.SURVIVAL and x < barrier) or (
        sol.regime is TimeRegime.REACH and x > barrier
    ):
        raise DomainViolation(f"x={x} outside the value-function domain")
    fn = time_value_function(sol, barrier)
    return 1.0 + generator_apply(dm, sol.nu_star, sol.w_star, r, c_net, fn, x)


def time_nu_term(dm: DerivedMarket, nu1: np.ndarray | float) -> np.ndarray | float:
    """Shift objective ||zeta + nu1 sigma^-1 1||^2 / 2 - nu1 (convex; minimized at nu1*).

    Equal to beta_nu - (r + c_net), so minimizing it over the cone minimizes
    the favourability parameter.
    """
    nu1 = np.asarray(nu1, dtype=float)
    norm_sq = 2.0 * dm.k + 2.0 * dm.D * nu1 + dm.K * nu1 * nu1
    return 0.5 * norm_sq - nu1
