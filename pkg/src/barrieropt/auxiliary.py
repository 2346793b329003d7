"""No-borrowing constraint machinery and the auxiliary (drift-shifted) market.

The budget constraint is the half-space ``1'w <= 1``.  Its support function is
finite exactly on the cone of all-equal nonpositive shift vectors
``nu = nu1 * 1`` with ``nu1 <= 0``, where ``delta(nu) = -nu1``.  Shifting the
riskless rate by ``delta(nu)`` and each drift by ``nu1 + delta(nu)`` yields an
unconstrained market whose price of risk is ``zeta + nu1 sigma^-1 1``; the
solvers pick the shift that makes the unconstrained optimum satisfy the
original constraint.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import (
    ConeViolation,
    DegenerateVolatility,
    DimensionMismatch,
    DomainViolation,
)
from .market import DerivedMarket

_VOL_NORM_TOL = 1e-12


@dataclass(frozen=True)
class FictitiousParam:
    """Common component nu1 <= 0 of the all-equal drift-shift vector."""

    nu1: float

    def __post_init__(self) -> None:
        if not math.isfinite(self.nu1):
            raise ConeViolation("nu1 must be finite")
        if self.nu1 > 0.0:
            raise ConeViolation(f"nu1 must be <= 0, got {self.nu1}")

    @classmethod
    def zero(cls) -> "FictitiousParam":
        return cls(0.0)

    def vector(self, n: int) -> np.ndarray:
        """Materialize the full shift vector nu1 * 1_N."""
        return np.full(n, self.nu1)


@dataclass(frozen=True)
class GbmCoefficients:
    """Log-space coefficients of a wealth process: d ln X = log_drift dt + vol_vector' dB."""

    log_drift: float
    log_vol: float
    vol_vector: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "vol_vector", np.atleast_1d(np.asarray(self.vol_vector, dtype=float)))
        norm = float(np.linalg.norm(self.vol_vector))
        if abs(norm - self.log_vol) > _VOL_NORM_TOL * max(1.0, norm):
            raise DimensionMismatch("log_vol must equal ||vol_vector||")
        if self.log_vol < 0.0:
            raise DimensionMismatch("log_vol must be nonnegative")

    @classmethod
    def from_vol_vector(cls, log_drift: float, vol_vector: np.ndarray) -> "GbmCoefficients":
        vol_vector = np.atleast_1d(np.asarray(vol_vector, dtype=float))
        return cls(log_drift=float(log_drift), log_vol=float(np.linalg.norm(vol_vector)), vol_vector=vol_vector)


@dataclass(frozen=True)
class C2Function:
    """A twice-differentiable function bundled with its analytic derivatives.

    Solvers hand these to the generator so residual checks stay sharp instead
    of leaning on numerical differentiation.
    """

    value: Callable[[float], float]
    deriv: Callable[[float], float]
    deriv2: Callable[[float], float]

    def __call__(self, x: float) -> float:
        return self.value(x)

    def __neg__(self) -> "C2Function":
        return C2Function(
            value=lambda x: -self.value(x),
            deriv=lambda x: -self.deriv(x),
            deriv2=lambda x: -self.deriv2(x),
        )


def support_delta(nu: FictitiousParam) -> float:
    """Support function of the budget constraint on the shift cone: delta(nu) = -nu1 >= 0."""
    if nu.nu1 > 0.0:
        raise ConeViolation(f"nu1 must be <= 0, got {nu.nu1}")
    return -nu.nu1


def shifted_price_of_risk(dm: DerivedMarket, nu: FictitiousParam) -> np.ndarray:
    """Price of risk in the shifted market: zeta + nu1 sigma^-1 1."""
    return dm.zeta + nu.nu1 * dm.sigma_inv_ones


def wealth_coefficients(
    dm: DerivedMarket,
    nu: FictitiousParam,
    w: np.ndarray,
    c_net: float,
    r: float,
) -> GbmCoefficients:
    """Log-space GBM coefficients of the shifted-market wealth under constant weights ``w``.

    log_drift = (r + delta(nu) + c_net) + w'(mu + nu - r 1) - w' Sigma w / 2,
    vol_vector = sigma' w, so ln X is a Brownian motion with drift.
    """
    w = np.atleast_1d(np.asarray(w, dtype=float))
    if w.shape != (dm.n,):
        raise DimensionMismatch(f"w must have length {dm.n}, got shape {w.shape}")
    delta = support_delta(nu)
    shifted_excess = dm.mu_excess + nu.nu1
    quad = float(w @ dm.Sigma @ w)
    log_drift = (r + delta + c_net) + float(w @ shifted_excess) - 0.5 * quad
    vol_vector = dm.sigma.T @ w
    return GbmCoefficients.from_vol_vector(log_drift, vol_vector)


def favourability(dm: DerivedMarket, nu: FictitiousParam, r: float, c_net: float) -> float:
    """Market favourability: log drift of the shifted market's log-optimal wealth.

    beta_nu = (r + c_net + delta(nu)) + ||zeta_nu||^2 / 2.  Positive means the
    log-optimal investor drifts up (favourable), negative means ruin wins in
    the long run (unfavourable).
    """
    zeta_nu = shifted_price_of_risk(dm, nu)
    return (r + c_net + support_delta(nu)) + 0.5 * float(zeta_nu @ zeta_nu)


def norm_cdf(z: float) -> float:
    """Standard normal CDF, accurate to well below 1e-12 absolute."""
    return 0.5 * math.erfc(-z / math.sqrt(2.0))


def ruin_curve(beta: float, zeta_norm: float, x: float, L: float, t: float) -> float:
    """P(log-optimal wealth at time t is at or below L), for the GBM with drift beta.

    Phi((ln(L/x) - beta t) / sqrt(zeta_norm^2 t)).
    """
    if zeta_norm == 0.0:
        raise DegenerateVolatility("ruin curve needs zeta_norm > 0")
    if not (0.0 < L <= x):
        raise DomainViolation(f"need x >= L > 0, got x={x}, L={L}")
    if t <= 0.0:
        raise DomainViolation(f"need t > 0, got {t}")
    arg = (math.log(L / x) - beta * t) / math.sqrt(zeta_norm * zeta_norm * t)
    return norm_cdf(arg)


def hjb_supremand(
    dm: DerivedMarket,
    nu: FictitiousParam,
    w: np.ndarray,
    fn: C2Function,
    x: float,
) -> float:
    """Strategy-dependent part of the generator: w'(mu + nu - r 1) x f' + w'Sigma w x^2 f'' / 2.

    For the solved value functions this is strictly concave in ``w`` and
    maximized at the optimal strategy; perturbation probes rely on that.
    """
    w = np.atleast_1d(np.asarray(w, dtype=float))
    if w.shape != (dm.n,):
        raise DimensionMismatch(f"w must have length {dm.n}, got shape {w.shape}")
    shifted_excess = dm.mu_excess + nu.nu1
    quad = float(w @ dm.Sigma @ w)
    return float(w @ shifted_excess) * x * fn.deriv(x) + 0.5 * quad * x * x * fn.deriv2(x)


def generator_apply(
    dm: DerivedMarket,
    nu: FictitiousParam,
    w: np.ndarray,
    r: float,
    c_net: float,
    fn: C2Function,
    x: float,
) -> float:
    """Apply the shifted-market wealth generator to a C2 function at x > 0.

    L^w f(x) = ((r + delta(nu) + c_net) + w'(mu + nu - r 1)) x f'(x)
               + w' Sigma w x^2 f''(x) / 2.
    """
    if not (x > 0.0 and math.isfinite(x)):
        raise DomainViolation(f"generator needs x > 0, got {x}")
    base = (r + support_delta(nu) + c_net) * x * fn.deriv(x)
    return base + hjb_supremand(dm, nu, w, fn, x)
