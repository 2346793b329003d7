"""Closed-form optimal strategies for barrier objectives under a no-borrowing constraint.

Three problems over a multi-asset Black-Scholes market with a proportional
net cash outflow and the budget constraint 1'w <= 1:

* goal probability -- maximize P(hit U before L);
* expected time -- maximize time to ruin, or minimize time to a goal;
* discounted reward -- maximize E[e^{-rho tau_U}] or minimize E[e^{-rho tau_L}].

Every closed form ships with an independent first-passage oracle and a
deterministic Monte Carlo engine so results can be verified end to end.
"""

from .auxiliary import (
    C2Function,
    FictitiousParam,
    GbmCoefficients,
    favourability,
    generator_apply,
    hjb_supremand,
    norm_cdf,
    ruin_curve,
    shifted_price_of_risk,
    support_delta,
    wealth_coefficients,
)
from .errors import (
    BarrierOptError,
    ConeViolation,
    ConfigError,
    ConstraintViolation,
    DegenerateEquation,
    DegenerateVolatility,
    DimensionMismatch,
    DomainViolation,
    FavourabilityViolation,
    InvalidBarriers,
    InvalidCashFlow,
    LogOptimalDegeneracy,
    MarketFormatError,
    NoRealRoots,
    RegimeError,
    RegimeMismatch,
    RegimeViolation,
    RootOutOfRange,
    SingularVolatility,
    WrongDriftDirection,
    ZeroFavourability,
)
from .goal import (
    GoalCase,
    GoalSolution,
    goal_hjb_residual,
    goal_nu_term,
    goal_value,
    goal_value_from_alpha,
    goal_value_function,
    solve_goal,
)
from .market import DerivedMarket, MarketSpec, build_derived, load_market
from .reward import (
    QuadraticRoots,
    RewardCase,
    RewardDirection,
    RewardSolution,
    discounted_value,
    quadratic_roots,
    reward_hjb_residual,
    reward_nu_term,
    reward_value_function,
    solve_penalty_min,
    solve_reward_max,
)
from .simulate import (
    DominanceResult,
    ExitRecord,
    ExitSide,
    MCEstimate,
    SimConfig,
    analytic_expected_exit_time,
    analytic_laplace_hitting,
    analytic_two_barrier_probability,
    estimate_discounted_reward,
    estimate_expected_exit_time,
    estimate_hit_probability,
    pathwise_dominance_check,
    simulate_exit,
)
from .timing import (
    TimeCase,
    TimeRegime,
    TimeSolution,
    reach_value,
    solve_time,
    survival_value,
    time_hjb_residual,
    time_nu_term,
    time_value_function,
)
from .verify import (
    CheckRecord,
    VerificationReport,
    report_to_json,
    verify_goal,
    verify_reward,
    verify_time,
)

__version__ = "0.1.0"
