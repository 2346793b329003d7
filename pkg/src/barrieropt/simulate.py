"""Monte Carlo engine and independent first-passage analytics.

Paths are exact in log space (constant-coefficient GBM), so the only
discretization error is crossing detection between grid points; an optional
Brownian-bridge correction for that is implemented but off by default to keep
the uncorrected baseline reproducible.  Estimates are deterministic functions
of (inputs, seed) regardless of how paths are scheduled, because every draw is
a pure function of (seed, path index, step).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import _kernels
from .auxiliary import FictitiousParam, GbmCoefficients, support_delta, wealth_coefficients
from .errors import (
    ConstraintViolation,
    DegenerateVolatility,
    DomainViolation,
    InvalidBarriers,
    WrongDriftDirection,
)
from .market import DerivedMarket

_NO_LOWER = -1.0e300  # finite sentinels keep the compiled kernels inf-free
_NO_UPPER = 1.0e300

DOMINANCE_TOL = 1e-9


class ExitSide(enum.Enum):
    LOWER = "lower"
    UPPER = "upper"
    CENSORED = "censored"


@dataclass(frozen=True)
class SimConfig:
    """Simulation settings; defaults match the CLI defaults."""

    n_paths: int = 100_000
    dt: float = 1e-3
    horizon: float = 500.0
    seed: int = 1
    bridge_correction: bool = False

    def __post_init__(self) -> None:
        if self.n_paths < 1:
            raise DomainViolation(f"n_paths must be >= 1, got {self.n_paths}")
        if not (self.dt > 0.0 and math.isfinite(self.dt)):
            raise DomainViolation(f"dt must be positive, got {self.dt}")
        if not (self.horizon >= self.dt and math.isfinite(self.horizon)):
            raise DomainViolation("horizon must be finite and at least dt")
        if self.seed < 0:
            raise DomainViolation("seed must be a nonnegative integer")

    @property
    def n_steps(self) -> int:
        return int(round(self.horizon / self.dt))


@dataclass(frozen=True)
class ExitRecord:
    """First-crossing outcome of a single path; exit_time is None when censored."""

    exit_time: Optional[float]
    exit_side: ExitSide

    def __post_init__(self) -> None:
        if (self.exit_time is None) != (self.exit_side is ExitSide.CENSORED):
            raise DomainViolation("exit_time is None exactly when the path is censored")


@dataclass(frozen=True)
class MCEstimate:
    """Monte Carlo point estimate.

    ``n_paths`` counts the paths contributing to the mean (absorbed paths for
    hit-probability and exit-time estimators, all paths for the discounted
    estimator) so that std_error = sample std / sqrt(n_paths).  ``n_censored``
    counts paths that reached the horizon without absorption.
    """

    mean: float
    std_error: float
    n_paths: int
    n_censored: int


@dataclass(frozen=True)
class DominanceResult:
    """Outcome of the common-noise dominance check."""

    dominates: bool       # shifted wealth >= plain wealth * (1 - 1e-9) everywhere
    equality: bool        # the two processes coincide to 1e-9 relative
    min_log_gap: float    # smallest ln(X_shifted / X_plain) over all paths and times
    max_abs_log_gap: float
    drift_gap: float      # delta(nu) + w'nu, the analytic growth-rate gap


def _validate_barriers(x0: float, L: float, U: float) -> None:
    if not (x0 > 0.0 and math.isfinite(x0)):
        raise InvalidBarriers(f"x0 must be positive and finite, got {x0}")
    if L < 0.0 or not (L < x0):
        raise InvalidBarriers(f"need 0 <= L < x0, got L={L}, x0={x0}")
    if not (U > x0):
        raise InvalidBarriers(f"need U > x0, got U={U}, x0={x0}")
    if L == 0.0 and math.isinf(U):
        raise InvalidBarriers("at least one barrier must be present")


def _deterministic_exit(gbm: GbmCoefficients, x0: float, L: float, U: float, cfg: SimConfig):
    """Grid-rounded exit for the zero-volatility (pure-drift) case."""
    m = gbm.log_drift
    if m < 0.0 and L > 0.0:
        dist = math.log(x0 / L)
        side = -1
    elif m > 0.0 and math.isfinite(U):
        dist = math.log(U / x0)
        side = 1
    else:
        return -1, 0
    steps = max(1, int(math.ceil(dist / (abs(m) * cfg.dt) - 1e-12)))
    if steps > cfg.n_steps:
        return -1, 0
    return steps, side


def _exit_arrays(
    gbm: GbmCoefficients,
    x0: float,
    L: float,
    U: float,
    cfg: SimConfig,
    path_start: int = 0,
    n_paths: Optional[int] = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Exit step (1-based, -1 censored) and side (-1/0/+1) per path."""
    _validate_barriers(x0, L, U)
    n = cfg.n_paths if n_paths is None else n_paths
    if gbm.log_vol == 0.0:
        steps_one, side_one = _deterministic_exit(gbm, x0, L, U, cfg)
        return (
            np.full(n, steps_one, dtype=np.int64),
            np.full(n, side_one, dtype=np.int8),
        )
    steps = np.empty(n, dtype=np.int64)
    sides = np.empty(n, dtype=np.int8)
    has_lower = L > 0.0
    has_upper = math.isfinite(U)
    _kernels.exit_scan(
        cfg.seed,
        path_start,
        n,
        cfg.n_steps,
        gbm.log_drift * cfg.dt,
        gbm.log_vol * math.sqrt(cfg.dt),
        math.log(x0),
        math.log(L) if has_lower else _NO_LOWER,
        math.log(U) if has_upper else _NO_UPPER,
        has_lower,
        has_upper,
        cfg.bridge_correction,
        gbm.log_vol * gbm.log_vol * cfg.dt,
        steps,
        sides,
    )
    return steps, sides


def simulate_exit(
    gbm: GbmCoefficients,
    x0: float,
    L: float,
    U: float,
    cfg: SimConfig,
    path_index: int,
) -> ExitRecord:
    """Simulate one path to its first barrier crossing (or the horizon).

    Deterministic given (cfg.seed, path_index): the same record comes back
    whether the path is run alone or as part of a bulk estimate.
    """
    steps, sides = _exit_arrays(gbm, x0, L, U, cfg, path_start=path_index, n_paths=1)
    if steps[0] < 0:
        return ExitRecord(exit_time=None, exit_side=ExitSide.CENSORED)
    side = ExitSide.LOWER if sides[0] < 0 else ExitSide.UPPER
    return ExitRecord(exit_time=float(steps[0]) * cfg.dt, exit_side=side)


def _sample_estimate(values: np.ndarray, n_censored: int) -> MCEstimate:
    n = values.size
    if n == 0:
        raise DomainViolation("no paths were absorbed; increase the horizon")
    mean = float(values.mean())
    se = float(values.std(ddof=1) / math.sqrt(n)) if n > 1 else 0.0
    return MCEstimate(mean=mean, std_error=se, n_paths=n, n_censored=n_censored)


def estimate_hit_probability(
    gbm: GbmCoefficients, x0: float, L: float, U: float, cfg: SimConfig
) -> MCEstimate:
    """P(hit U before L): fraction of upper exits among absorbed paths.

    Censored paths are excluded from the ratio and reported via n_censored.
    """
    if L <= 0.0 or not math.isfinite(U):
        raise InvalidBarriers("hit probability needs two finite barriers")
    steps, sides = _exit_arrays(gbm, x0, L, U, cfg)
    absorbed = steps > 0
    values = (sides[absorbed] > 0).astype(float)
    return _sample_estimate(values, int((~absorbed).sum()))


def estimate_expected_exit_time(
    gbm: GbmCoefficients,
    x0: float,
    barrier: float,
    side: ExitSide,
    cfg: SimConfig,
) -> MCEstimate:
    """Mean one-sided exit time over absorbed paths (lower-biased if any censor)."""
    if side is ExitSide.LOWER:
        steps, sides = _exit_arrays(gbm, x0, barrier, math.inf, cfg)
    elif side is ExitSide.UPPER:
        steps, sides = _exit_arrays(gbm, x0, 0.0, barrier, cfg)
    else:
        raise DomainViolation("side must be LOWER or UPPER")
    absorbed = steps > 0
    values = steps[absorbed].astype(float) * cfg.dt
    return _sample_estimate(values, int((~absorbed).sum()))


def estimate_discounted_reward(
    gbm: GbmCoefficients,
    x0: float,
    barrier: float,
    side: ExitSide,
    rho: float,
    cfg: SimConfig,
) -> MCEstimate:
    """Mean of e^{-rho tau} over all paths.

    Censored paths contribute e^{-rho * horizon} (an upper-bias bound on their
    unknown tail); the substitution count is reported as n_censored.
    """
    if not (rho > 0.0 and math.isfinite(rho)):
        raise DomainViolation(f"rho must be positive, got {rho}")
    if x0 == barrier:
        # the barrier is hit at time zero
        return MCEstimate(mean=1.0, std_error=0.0, n_paths=cfg.n_paths, n_censored=0)
    if side is ExitSide.LOWER:
        steps, sides = _exit_arrays(gbm, x0, barrier, math.inf, cfg)
    elif side is ExitSide.UPPER:
        steps, sides = _exit_arrays(gbm, x0, 0.0, barrier, cfg)
    else:
        raise DomainViolation("side must be LOWER or UPPER")
    times = np.where(steps > 0, steps.astype(float) * cfg.dt, cfg.horizon)
    values = np.exp(-rho * times)
    return _sample_estimate(values, int((steps < 0).sum()))


# --- analytic oracles --------------------------------------------------------


def analytic_two_barrier_probability(
    log_drift: float, log_vol: float, x0: float, L: float, U: float
) -> float:
    """Exit law of drifted Brownian motion: P(ln X hits ln U before ln L).

    With y = ln x0, a = ln L, b = ln U and theta = -2 m / s^2 this is
    (e^{theta (y-a)} - 1) / (e^{theta (b-a)} - 1), continuous at theta = 0
    where it becomes (y - a)/(b - a).
    """
    if log_vol <= 0.0:
        raise DegenerateVolatility("two-barrier law needs log_vol > 0")
    if not (0.0 < L < x0 < U) or math.isinf(U):
        raise DomainViolation(f"need 0 < L < x0 < U finite, got {L}, {x0}, {U}")
    theta = -2.0 * log_drift / (log_vol * log_vol)
    ya = math.log(x0 / L)
    ba = math.log(U / L)
    if theta == 0.0:
        return ya / ba
    if theta * ba > 700.0:
        # rescale from the upper barrier to dodge overflow
        return math.exp(theta * (ya - ba)) * (
            -math.expm1(-theta * ya) / -math.expm1(-theta * ba)
        )
    return math.expm1(theta * ya) / math.expm1(theta * ba)


def analytic_expected_exit_time(
    log_drift: float, x0: float, barrier: float, side: ExitSide
) -> float:
    """Wald-identity expected hitting time |ln(x0/barrier)| / |m| (drift toward)."""
    if not (x0 > 0.0 and barrier > 0.0):
        raise DomainViolation("x0 and barrier must be positive")
    if x0 == barrier:
        return 0.0
    if side is ExitSide.LOWER:
        if not (barrier < x0) or log_drift >= 0.0:
            raise WrongDriftDirection("lower-exit time needs barrier < x0 and drift < 0")
    elif side is ExitSide.UPPER:
        if not (barrier > x0) or log_drift <= 0.0:
            raise WrongDriftDirection("upper-exit time needs barrier > x0 and drift > 0")
    else:
        raise DomainViolation("side must be LOWER or UPPER")
    return abs(math.log(x0 / barrier)) / abs(log_drift)


def analytic_laplace_hitting(
    log_drift: float,
    log_vol: float,
    x0: float,
    barrier: float,
    side: ExitSide,
    rho: float,
) -> float:
    """First-passage Laplace transform E[e^{-rho tau}] for drifted Brownian motion.

    exp(-|ln(x0/barrier)| eta) with eta > 0 the root of
    s^2 eta^2 / 2 -+ m eta - rho = 0 (sign by side), i.e. the exponent making
    X^{-+eta} e^{-rho t} a martingale.  Computed cancellation-free.
    """
    if log_vol <= 0.0:
        raise DegenerateVolatility("Laplace transform needs log_vol > 0")
    if not (rho > 0.0 and math.isfinite(rho)):
        raise DomainViolation(f"rho must be positive, got {rho}")
    if not (x0 > 0.0 and barrier > 0.0):
        raise DomainViolation("x0 and barrier must be positive")
    if side is ExitSide.UPPER:
        if barrier < x0:
            raise DomainViolation("upper barrier must satisfy barrier >= x0")
        m = log_drift
    elif side is ExitSide.LOWER:
        if barrier > x0:
            raise DomainViolation("lower barrier must satisfy barrier <= x0")
        m = -log_drift
    else:
        raise DomainViolation("side must be LOWER or UPPER")
    s2 = log_vol * log_vol
    root = math.sqrt(m * m + 2.0 * rho * s2)
    if m > 0.0:
        eta = 2.0 * rho / (m + root)
    else:
        eta = (-m + root) / s2
    return math.exp(-abs(math.log(x0 / barrier)) * eta)


# --- pathwise dominance ------------------------------------------------------


def pathwise_dominance_check(
    dm: DerivedMarket,
    r: float,
    c_net: float,
    nu: FictitiousParam,
    w: np.ndarray,
    cfg: SimConfig,
) -> DominanceResult:
    """Check that the shifted-market wealth dominates the plain wealth pathwise.

    Both processes are driven by the same Gaussian increments (they share the
    volatility vector sigma'w), so the requirement X_shifted >= X * (1 - 1e-9)
    at every grid point reduces to a log-gap scan.  Equality is reported when
    the processes coincide to 1e-9, which happens exactly on the duality-gap
    surface delta(nu) + w'nu = 0.

    Raises:
        ConstraintViolation: 1'w > 1 (strategy outside the budget set).
    """
    w = np.atleast_1d(np.asarray(w, dtype=float))
    budget = float(w.sum())
    if budget > 1.0 + 1e-12:
        raise ConstraintViolation(f"1'w = {budget} exceeds the budget")
    plain = wealth_coefficients(dm, FictitiousParam.zero(), w, c_net, r)
    shifted = wealth_coefficients(dm, nu, w, c_net, r)
    min_gap = np.empty(cfg.n_paths, dtype=np.float64)
    max_absgap = np.empty(cfg.n_paths, dtype=np.float64)
    _kernels.dominance_scan(
        cfg.seed,
        cfg.n_paths,
        cfg.n_steps,
        plain.log_drift * cfg.dt,
        shifted.log_drift * cfg.dt,
        plain.log_vol * math.sqrt(cfg.dt),
        min_gap,
        max_absgap,
    )
    worst = float(min_gap.min())
    largest = float(max_absgap.max())
    drift_gap = support_delta(nu) + float(w @ nu.vector(dm.n))
    return DominanceResult(
        dominates=worst >= math.log1p(-DOMINANCE_TOL),
        equality=largest <= DOMINANCE_TOL,
        min_log_gap=worst,
        max_abs_log_gap=largest,
        drift_gap=drift_gap,
    )
