"""Maximize the probability of reaching an upper barrier before a lower one.

The optimal strategy is a constant proportion: ``-w_o / alpha`` when that
already respects the budget, otherwise the budget hyperplane point obtained by
shifting the price of risk with the optimal fictitious parameter.  The value
function is a two-sided power function of wealth with exponent ``1 + alpha``,

    F(x) = (L^{1+a} - x^{1+a}) / (L^{1+a} - U^{1+a}),   a = alpha < 0,

independent of the current wealth level except through x itself.
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
    generator_apply,
    shifted_price_of_risk,
    wealth_coefficients,
)
from .errors import (
    DomainViolation,
    InvalidBarriers,
    LogOptimalDegeneracy,
    RegimeViolation,
)
from .market import DerivedMarket

ALPHA_DEGENERACY_TOL = 1e-10


class GoalCase(enum.Enum):
    UNCONSTRAINED = "unconstrained"
    CONSTRAINED = "constrained"


@dataclass(frozen=True)
class GoalSolution:
    """Closed-form solution of the goal-probability problem."""

    case: GoalCase
    alpha: float
    nu_star: FictitiousParam
    w_star: np.ndarray
    wealth: GbmCoefficients
    L: float
    U: float


def solve_goal(dm: DerivedMarket, r: float, c_net: float, L: float, U: float) -> GoalSolution:
    """Solve the goal problem on barriers 0 < L < U.

    Case selection is two-pass: compute the unconstrained candidate
    ``alpha_u = ||zeta||^2 / (2 (r + c_net))`` first; if the implied strategy
    busts the budget (``-(1/alpha_u) 1'w_o >= 1``, ties constrained) recompute
    ``alpha = -2 (K (r + c_net) + D)`` and place the strategy on the budget
    hyperplane via the shifted price of risk.

    Raises:
        InvalidBarriers: unless 0 < L < U.
        RegimeViolation: r + c_net >= 0, or the branch exponent is not negative.
        LogOptimalDegeneracy: the exponent lands on the excluded point -1.
    """
    if not (0.0 < L < U) or not (math.isfinite(L) and math.isfinite(U)):
        raise InvalidBarriers(f"need 0 < L < U, got L={L}, U={U}")
    a = r + c_net
    if a >= 0.0:
        raise RegimeViolation(f"goal problem needs r + c_net < 0, got {a}")

    norm_zeta_sq = 2.0 * dm.k
    alpha_u = norm_zeta_sq / (2.0 * a)
    if alpha_u >= 0.0:
        # zero excess return: no alpha < 0 exists
        raise RegimeViolation("goal problem needs a nonzero market price of risk")

    if -(1.0 / alpha_u) * dm.D < 1.0:
        case = GoalCase.UNCONSTRAINED
        alpha = alpha_u
        nu_star = FictitiousParam.zero()
        w_star = -(1.0 / alpha) * dm.w_o
    else:
        case = GoalCase.CONSTRAINED
        alpha = -2.0 * (dm.K * a + dm.D)
        if alpha >= 0.0:
            raise RegimeViolation(
                f"constrained-branch exponent must be negative, got alpha={alpha}"
            )
        nu_star = FictitiousParam(-(alpha + dm.D) / dm.K)
        zeta_nu = shifted_price_of_risk(dm, nu_star)
        w_star = -(1.0 / alpha) * np.linalg.solve(dm.sigma.T, zeta_nu)
    if abs(alpha + 1.0) <= ALPHA_DEGENERACY_TOL:
        raise LogOptimalDegeneracy("alpha = -1 is excluded for the goal problem")

    wealth = wealth_coefficients(dm, nu_star, w_star, c_net, r)
    return GoalSolution(
        case=case,
        alpha=alpha,
        nu_star=nu_star,
        w_star=w_star,
        wealth=wealth,
        L=L,
        U=U,
    )


def goal_value_from_alpha(alpha: float, L: float, U: float, x: float) -> float:
    """Two-barrier success probability for a given exponent; the closed form itself.

    Computed as expm1(q ln(x/L)) / expm1(q ln(U/L)) with q = 1 + alpha, which
    is exact at the boundaries and stable for q near 0.
    """
    q = 1.0 + alpha
    return math.expm1(q * math.log(x / L)) / math.expm1(q * math.log(U / L))


def goal_value(sol: GoalSolution, x: float) -> float:
    """Optimal probability of hitting U before L starting from wealth x in [L, U]."""
    if not (sol.L <= x <= sol.U):
        raise DomainViolation(f"x must lie in [{sol.L}, {sol.U}], got {x}")
    return goal_value_from_alpha(sol.alpha, sol.L, sol.U, x)


def goal_value_function(sol: GoalSolution) -> C2Function:
    """The value function with analytic first and second derivatives."""
    q = 1.0 + sol.alpha
    lq = math.exp(q * math.log(sol.L))
    uq = math.exp(q * math.log(sol.U))
    denom = lq - uq

    def value(x: float) -> float:
        return (lq - math.exp(q * math.log(x))) / denom

    def deriv(x: float) -> float:
        return -q * math.exp((q - 1.0) * math.log(x)) / denom

    def deriv2(x: float) -> float:
        return -q * (q - 1.0) * math.exp((q - 2.0) * math.log(x)) / denom

    return C2Function(value=value, deriv=deriv, deriv2=deriv2)


def goal_hjb_residual(
    sol: GoalSolution, dm: DerivedMarket, r: float, c_net: float, x: float
) -> float:
    """Residual of the dynamic-programming equation at (F, w*, nu*); zero at the solution."""
    if not (sol.L < x < sol.U):
        raise DomainViolation(f"x must lie in ({sol.L}, {sol.U}), got {x}")
    fn = goal_value_function(sol)
    return generator_apply(dm, sol.nu_star, sol.w_star, r, c_net, fn, x)


def goal_nu_term(dm: DerivedMarket, alpha: float, nu1: np.ndarray | float) -> np.ndarray | float:
    """Shift objective (1/(2 alpha)) ||zeta + nu1 sigma^-1 1||^2 + nu1.

    The optimal shift is its stationary point.  For alpha < 0 the term is
    concave in nu1, so over the cone the optimal shift is its argmax (the
    value function, not this term, is what the shift minimizes).
    """
    nu1 = np.asarray(nu1, dtype=float)
    norm_sq = 2.0 * dm.k + 2.0 * dm.D * nu1 + dm.K * nu1 * nu1
    return norm_sq / (2.0 * alpha) + nu1
