"""Discounted barrier rewards: maximize E[e^{-rho tau_U}] or minimize E[e^{-rho tau_L}].

The value function is a single power of wealth, (x/barrier)^{-d}, where d is a
root of a quadratic: the root in (-1, 0) prices the reward (favourable
markets), the positive root prices the penalty (unfavourable markets).  Case
selection mirrors the other solvers: try the unconstrained root first, move to
the budget hyperplane if it busts the budget.
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
from .errors import (
    DegenerateEquation,
    DomainViolation,
    FavourabilityViolation,
    InvalidBarriers,
    NoRealRoots,
    RootOutOfRange,
)
from .market import DerivedMarket

_QUAD_RESIDUAL_TOL = 1e-10


class RewardDirection(enum.Enum):
    MAX_REWARD = "max-reward"      # discounted payout at the upper barrier
    MIN_PENALTY = "min-penalty"    # discounted penalty at the lower barrier


class RewardCase(enum.Enum):
    UNCONSTRAINED = "unconstrained"
    CONSTRAINED = "constrained"


@dataclass(frozen=True)
class QuadraticRoots:
    """Real roots of a2 d^2 + a1 d + a0 = 0, sorted; linear fallback flagged."""

    d_minus: float
    d_plus: float
    degenerate: bool  # a2 == 0: single linear root reported in both slots


def quadratic_roots(a2: float, a1: float, a0: float) -> QuadraticRoots:
    """Cancellation-safe real roots, sorted d_minus <= d_plus.

    The larger-magnitude root comes from the sign-matched quadratic formula,
    the other from the product of roots, so tiny constant terms (small
    discount rates) do not lose precision to subtraction.

    Raises:
        DegenerateEquation: a2 = 0 and a1 = 0.
        NoRealRoots: negative discriminant.
    """
    if a2 == 0.0:
        if a1 == 0.0:
            raise DegenerateEquation("both leading coefficients vanish")
        root = -a0 / a1
        return QuadraticRoots(d_minus=root, d_plus=root, degenerate=True)
    disc = a1 * a1 - 4.0 * a2 * a0
    if disc < 0.0:
        raise NoRealRoots(f"discriminant {disc} < 0")
    if a0 == 0.0:
        roots = sorted((0.0, -a1 / a2))
        return QuadraticRoots(d_minus=roots[0], d_plus=roots[1], degenerate=False)
    q = -0.5 * (a1 + math.copysign(math.sqrt(disc), a1 if a1 != 0.0 else 1.0))
    roots = sorted((q / a2, a0 / q))
    return QuadraticRoots(d_minus=roots[0], d_plus=roots[1], degenerate=False)


@dataclass(frozen=True)
class RewardSolution:
    """Closed-form solution of a discounted-reward problem."""

    direction: RewardDirection
    case: RewardCase
    d: float                    # root in (-1, 0) for MAX_REWARD, > 0 for MIN_PENALTY
    nu_star: FictitiousParam
    w_star: np.ndarray
    wealth: GbmCoefficients
    barrier: float              # U for MAX_REWARD, L for MIN_PENALTY
    rho: float
    discriminant: float         # discriminant of the branch quadratic actually used


def _unconstrained_quadratic(dm: DerivedMarket, a: float, rho: float) -> tuple[float, float, float]:
    return (a, a + dm.k + rho, rho)


def _constrained_quadratic(dm: DerivedMarket, a: float, rho: float) -> tuple[float, float, float]:
    return (1.0, 1.0 - 2.0 * (dm.K * a + dm.D), -2.0 * dm.K * rho)


def _discriminant(coeffs: tuple[float, float, float]) -> float:
    a2, a1, a0 = coeffs
    return a1 * a1 - 4.0 * a2 * a0


def _pick_root(roots: QuadraticRoots, lo: float, hi: float, what: str) -> float:
    for cand in (roots.d_minus, roots.d_plus):
        if lo < cand < hi:
            return cand
    raise RootOutOfRange(
        f"no root of the {what} quadratic in ({lo}, {hi}); got "
        f"({roots.d_minus}, {roots.d_plus})"
    )


def _quad_residual(coeffs: tuple[float, float, float], d: float) -> float:
    a2, a1, a0 = coeffs
    res = a2 * d * d + a1 * d + a0
    scale = max(abs(a2 * d * d), abs(a1 * d), abs(a0), 1e-300)
    return abs(res) / scale


def _validate_common(rho: float, barrier: float) -> None:
    if not (rho > 0.0 and math.isfinite(rho)):
        raise DomainViolation(f"discount rate must be positive, got {rho}")
    if not (barrier > 0.0 and math.isfinite(barrier)):
        raise InvalidBarriers(f"barrier must be positive and finite, got {barrier}")


def solve_reward_max(
    dm: DerivedMarket, r: float, c_net: float, rho: float, U: float
) -> RewardSolution:
    """Maximize the discounted value of a unit payment at the upper barrier U.

    Defined only in favourable markets: the branch-specific positive-drift
    condition must hold (optimal wealth drifts toward U, so the hitting time
    is almost surely finite).

    Raises:
        FavourabilityViolation: the market is not favourable for this branch.
        RootOutOfRange: no quadratic root lies in (-1, 0).
        NoRealRoots, DegenerateEquation: propagated from the quadratic.
    """
    _validate_common(rho, U)
    a = r + c_net
    unc = _unconstrained_quadratic(dm, a, rho)
    d_unc = _pick_root(quadratic_roots(*unc), -1.0, 0.0, "unconstrained reward")

    if (1.0 / (1.0 + d_unc)) * dm.D < 1.0:
        case = RewardCase.UNCONSTRAINED
        d = d_unc
        coeffs = unc
        # favourable iff the optimal wealth log-drift is positive
        drift = a + (2.0 * dm.k / (1.0 + d)) * (1.0 - 0.5 / (1.0 + d))
        if drift <= 0.0:
            raise FavourabilityViolation(
                f"reward maximization needs a favourable market (optimal drift {drift} <= 0)"
            )
        nu_star = FictitiousParam.zero()
        w_star = dm.w_o / (1.0 + d)
    else:
        case = RewardCase.CONSTRAINED
        drift = a + dm.D / dm.K - 0.5 / dm.K
        if drift <= 0.0:
            raise FavourabilityViolation(
                f"reward maximization needs a favourable market (optimal drift {drift} <= 0)"
            )
        coeffs = _constrained_quadratic(dm, a, rho)
        d = _pick_root(quadratic_roots(*coeffs), -1.0, 0.0, "constrained reward")
        nu_star = FictitiousParam((d + 1.0 - dm.D) / dm.K)
        zeta_nu = shifted_price_of_risk(dm, nu_star)
        w_star = np.linalg.solve(dm.sigma.T, zeta_nu) / (1.0 + d)
    if _quad_residual(coeffs, d) > _QUAD_RESIDUAL_TOL:
        raise NoRealRoots("root fails to satisfy its quadratic")  # pragma: no cover

    wealth = wealth_coefficients(dm, nu_star, w_star, c_net, r)
    return RewardSolution(
        direction=RewardDirection.MAX_REWARD,
        case=case,
        d=d,
        nu_star=nu_star,
        w_star=w_star,
        wealth=wealth,
        barrier=U,
        rho=rho,
        discriminant=_discriminant(coeffs),
    )


def solve_penalty_min(
    dm: DerivedMarket, r: float, c_net: float, rho: float, L: float
) -> RewardSolution:
    """Minimize the discounted value of a unit penalty at the lower barrier L.

    Defined only in unfavourable markets.  The cone-wide unfavourability the
    theory asks for is not pointwise checkable, so it is enforced at the two
    decision-relevant shifts: nu = 0 and nu = nu_star.

    Raises:
        FavourabilityViolation: favourability is nonnegative at nu = 0 or nu_star.
        RootOutOfRange: no positive quadratic root.
        NoRealRoots, DegenerateEquation: propagated from the quadratic.
    """
    _validate_common(rho, L)
    a = r + c_net
    if favourability(dm, FictitiousParam.zero(), r, c_net) >= 0.0:
        raise FavourabilityViolation("penalty minimization needs an unfavourable market")
    unc = _unconstrained_quadratic(dm, a, rho)
    d_unc = _pick_root(quadratic_roots(*unc), 0.0, math.inf, "unconstrained penalty")

    if (1.0 / (1.0 + d_unc)) * dm.D < 1.0:
        case = RewardCase.UNCONSTRAINED
        d = d_unc
        coeffs = unc
        nu_star = FictitiousParam.zero()
        w_star = dm.w_o / (1.0 + d)
    else:
        case = RewardCase.CONSTRAINED
        coeffs = _constrained_quadratic(dm, a, rho)
        d = _pick_root(quadratic_roots(*coeffs), 0.0, math.inf, "constrained penalty")
        nu_star = FictitiousParam((d + 1.0 - dm.D) / dm.K)
        zeta_nu = shifted_price_of_risk(dm, nu_star)
        w_star = np.linalg.solve(dm.sigma.T, zeta_nu) / (1.0 + d)
    if favourability(dm, nu_star, r, c_net) >= 0.0:
        raise FavourabilityViolation(
            "market is favourable at the optimal shift; no penalty to minimize"
        )
    if _quad_residual(coeffs, d) > _QUAD_RESIDUAL_TOL:
        raise NoRealRoots("root fails to satisfy its quadratic")  # pragma: no cover

    wealth = wealth_coefficients(dm, nu_star, w_star, c_net, r)
    return RewardSolution(
        direction=RewardDirection.MIN_PENALTY,
        case=case,
        d=d,
        nu_star=nu_star,
        w_star=w_star,
        wealth=wealth,
        barrier=L,
        rho=rho,
        discriminant=_discriminant(coeffs),
    )


def discounted_value(sol: RewardSolution, x: float) -> float:
    """Optimal expected discounted reward/penalty, (x/barrier)^{-d} in [0, 1]."""
    if sol.direction is RewardDirection.MAX_REWARD:
        if not (0.0 < x <= sol.barrier):
            raise DomainViolation(f"need 0 < x <= U={sol.barrier}, got {x}")
    else:
        if not (x >= sol.barrier):
            raise DomainViolation(f"need x >= L={sol.barrier}, got {x}")
    return math.exp(-sol.d * math.log(x / sol.barrier))


def reward_value_function(sol: RewardSolution) -> C2Function:
    """The power value function with analytic derivatives."""
    d = sol.d
    barrier = sol.barrier

    def value(x: float) -> float:
        return math.exp(-d * math.log(x / barrier))

    def deriv(x: float) -> float:
        return -d * value(x) / x

    def deriv2(x: float) -> float:
        return d * (d + 1.0) * value(x) / (x * x)

    return C2Function(value=value, deriv=deriv, deriv2=deriv2)


def reward_hjb_residual(
    sol: RewardSolution, dm: DerivedMarket, r: float, c_net: float, x: float
) -> float:
    """Residual -rho G + L^{w*} G of the discounted equation; zero at the solution."""
    if sol.direction is RewardDirection.MAX_REWARD:
        if not (0.0 < x < sol.barrier):
            raise DomainViolation(f"need 0 < x < U={sol.barrier}, got {x}")
    else:
        if not (x > sol.barrier):
            raise DomainViolation(f"need x > L={sol.barrier}, got {x}")
    fn = reward_value_function(sol)
    return -sol.rho * fn(x) + generator_apply(dm, sol.nu_star, sol.w_star, r, c_net, fn, x)


def reward_nu_term(dm: DerivedMarket, d: float, nu1: np.ndarray | float) -> np.ndarray | float:
    """Shift objective (d / (2 (d + 1))) ||zeta + nu1 sigma^-1 1||^2 - d nu1.

    Convex in nu1 for d > 0 (penalty: nu1* is its cone argmin) and concave for
    -1 < d < 0 (reward: nu1* is its cone argmax); either way nu1* is the
    stationary point and the branch value function is minimized over the cone.
    """
    nu1 = np.asarray(nu1, dtype=float)
    norm_sq = 2.0 * dm.k + 2.0 * dm.D * nu1 + dm.K * nu1 * nu1
    return (d / (2.0 * (d + 1.0))) * norm_sq - d * nu1
