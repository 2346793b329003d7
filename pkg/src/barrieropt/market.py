"""Market inputs and the derived quantities shared by every solver.

A market is a riskless rate ``r``, a strictly negative proportional net
cash-flow rate ``c_net``, asset drifts ``mu`` and a volatility matrix
``sigma``.  Everything the solvers need downstream is a handful of derived
quantities:

    Sigma = sigma sigma'              asset covariance
    zeta  = sigma^-1 (mu - r 1)       market price of risk
    w_o   = Sigma^-1 (mu - r 1)       log-optimal portfolio weights
    D     = zeta' sigma^-1 1 = 1'w_o  sum of log-optimal weights
    K     = 1' Sigma^-1 1             budget-direction precision mass
    k     = ||zeta||^2 / 2            log-growth premium of w_o

Rates are annualized decimals, volatilities are per square-root year.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import (
    DimensionMismatch,
    InvalidCashFlow,
    MarketFormatError,
    SingularVolatility,
)

# Reject volatility matrices with 2-norm condition number above this.
CONDITION_LIMIT = 1e12

_MARKET_KEYS = {"r", "c_net", "mu", "sigma"}


@dataclass(frozen=True)
class MarketSpec:
    """Raw market inputs before any derived computation.

    Args:
        r: riskless rate (per year).
        c_net: proportional net cash-flow rate (per year), strictly negative.
        mu: length-N vector of asset drifts (per year).
        sigma: N x N volatility matrix (per sqrt-year).
    """

    r: float
    c_net: float
    mu: np.ndarray
    sigma: np.ndarray
    n: int = field(init=False)

    def __post_init__(self) -> None:
        mu = np.atleast_1d(np.asarray(self.mu, dtype=float))
        sigma = np.atleast_2d(np.asarray(self.sigma, dtype=float))
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "sigma", sigma)
        object.__setattr__(self, "n", mu.shape[0])
        if mu.ndim != 1 or self.n < 1:
            raise DimensionMismatch("mu must be a non-empty 1-D vector")
        if sigma.shape != (self.n, self.n):
            raise DimensionMismatch(
                f"sigma must be {self.n}x{self.n}, got {sigma.shape}"
            )
        if not (np.isfinite(self.r) and np.all(np.isfinite(mu)) and np.all(np.isfinite(sigma))):
            raise DimensionMismatch("market inputs must be finite")
        if not np.isfinite(self.c_net) or self.c_net >= 0.0:
            raise InvalidCashFlow(f"c_net must be strictly negative, got {self.c_net}")


@dataclass(frozen=True)
class DerivedMarket:
    """Validated derived quantities; immutable and freely shareable."""

    spec: MarketSpec
    Sigma: np.ndarray          # sigma sigma', symmetric positive definite
    zeta: np.ndarray           # market price of risk
    w_o: np.ndarray            # log-optimal weights
    D: float                   # zeta' sigma^-1 1 = 1' w_o
    K: float                   # 1' Sigma^-1 1 > 0
    k: float                   # ||zeta||^2 / 2
    sigma_inv_ones: np.ndarray  # sigma^-1 1, used for the drift-shifted price of risk

    @property
    def sigma(self) -> np.ndarray:
        return self.spec.sigma

    @property
    def n(self) -> int:
        return self.spec.n

    @property
    def r(self) -> float:
        return self.spec.r

    @property
    def c_net(self) -> float:
        return self.spec.c_net

    @property
    def mu_excess(self) -> np.ndarray:
        """Excess drift vector mu - r 1."""
        return self.spec.mu - self.spec.r


def _chol_solve(chol_lower: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Solve (L L') x = b given the lower Cholesky factor."""
    y = np.linalg.solve(chol_lower, b)
    return np.linalg.solve(chol_lower.T, y)


def build_derived(spec: MarketSpec) -> DerivedMarket:
    """Validate ``spec`` and compute every derived quantity the solvers use.

    The covariance is inverted through its Cholesky factor rather than by
    forming an explicit inverse, and the log-optimal weights are computed by
    two independent routes (Sigma-solve and back-substitution through sigma')
    which must agree; disagreement is treated as effective singularity.

    Raises:
        SingularVolatility: sigma fails the condition-number guard, or the two
            computation routes for the log-optimal weights disagree.
        InvalidCashFlow: c_net >= 0 (validated on the spec).
        DimensionMismatch: inconsistent shapes (validated on the spec).
    """
    sigma = spec.sigma
    cond = np.linalg.cond(sigma)
    if not np.isfinite(cond) or cond > CONDITION_LIMIT:
        raise SingularVolatility(
            f"sigma condition number {cond:.3e} exceeds guard {CONDITION_LIMIT:.0e}"
        )

    ones = np.ones(spec.n)
    excess = spec.mu - spec.r
    zeta = np.linalg.solve(sigma, excess)
    sigma_inv_ones = np.linalg.solve(sigma, ones)

    Sigma = sigma @ sigma.T
    Sigma = 0.5 * (Sigma + Sigma.T)
    try:
        chol = np.linalg.cholesky(Sigma)
    except np.linalg.LinAlgError as exc:
        raise SingularVolatility("sigma sigma' is not positive definite") from exc

    w_o = _chol_solve(chol, excess)
    w_o_alt = np.linalg.solve(sigma.T, zeta)
    scale = max(1.0, float(np.linalg.norm(w_o)))
    # 1e-12 relative route agreement, relaxed with the conditioning of Sigma.
    tol = max(1e-12, 32.0 * np.finfo(float).eps * cond * cond)
    if np.linalg.norm(w_o - w_o_alt) > tol * scale:
        raise SingularVolatility(
            "log-optimal weights disagree between Sigma-solve and sigma'-solve routes"
        )

    D = float(zeta @ sigma_inv_ones)
    K = float(ones @ _chol_solve(chol, ones))
    if K <= 0.0:
        raise SingularVolatility("1' Sigma^-1 1 must be positive")
    k = 0.5 * float(zeta @ zeta)

    return DerivedMarket(
        spec=spec,
        Sigma=Sigma,
        zeta=zeta,
        w_o=w_o,
        D=D,
        K=K,
        k=k,
        sigma_inv_ones=sigma_inv_ones,
    )


def load_market(source: str | Path | dict) -> MarketSpec:
    """Load a market from a JSON file (or an already-parsed dict).

    Schema is strict: exactly the keys ``r``, ``c_net``, ``mu`` (array) and
    ``sigma`` (array of arrays); anything else is rejected.
    """
    if isinstance(source, dict):
        data = source
    else:
        try:
            data = json.loads(Path(source).read_text())
        except OSError as exc:
            raise MarketFormatError(f"cannot read market file: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise MarketFormatError(f"market file is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise MarketFormatError("market JSON must be an object")
    unknown = set(data) - _MARKET_KEYS
    if unknown:
        raise MarketFormatError(f"unknown market keys: {sorted(unknown)}")
    missing = _MARKET_KEYS - set(data)
    if missing:
        raise MarketFormatError(f"missing market keys: {sorted(missing)}")
    if not isinstance(data["mu"], list):
        raise MarketFormatError("mu must be an array")
    if not isinstance(data["sigma"], list) or not all(isinstance(row, list) for row in data["sigma"]):
        raise MarketFormatError("sigma must be an array of arrays")
    for key in ("r", "c_net"):
        if isinstance(data[key], bool) or not isinstance(data[key], (int, float)):
            raise MarketFormatError(f"{key} must be a number")
    return MarketSpec(
        r=float(data["r"]),
        c_net=float(data["c_net"]),
        mu=np.asarray(data["mu"], dtype=float),
        sigma=np.asarray(data["sigma"], dtype=float),
    )
