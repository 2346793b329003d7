import numpy as np
import pytest

from barrieropt import DerivedMarket, MarketSpec, SimConfig, build_derived

R = 0.02
C_NET = -0.05


@pytest.fixture(scope="session")
def market_a() -> DerivedMarket:
    """Single asset, high excess return: goal problem is unconstrained, D = 1.6."""
    return build_derived(MarketSpec(r=R, c_net=C_NET, mu=[0.12], sigma=[[0.25]]))


@pytest.fixture(scope="session")
def market_b() -> DerivedMarket:
    """Single asset, low excess return: goal problem is constrained, D = 0.64."""
    return build_derived(MarketSpec(r=R, c_net=C_NET, mu=[0.06], sigma=[[0.25]]))


@pytest.fixture(scope="session")
def quick_cfg() -> SimConfig:
    """Small but honest Monte Carlo budget for module-level 3-SE checks."""
    return SimConfig(n_paths=10_000, dt=1e-3, horizon=500.0, seed=7)


def random_orthogonal(rng: np.random.Generator, n: int) -> np.ndarray:
    q, r = np.linalg.qr(rng.normal(size=(n, n)))
    return q * np.sign(np.diag(r))


def random_sigma(rng: np.random.Generator, n: int,
                 lo: float = 0.1, hi: float = 0.45) -> np.ndarray:
    """Well-conditioned random volatility matrix via its SVD."""
    q1 = random_orthogonal(rng, n)
    q2 = random_orthogonal(rng, n)
    svals = rng.uniform(lo, hi, n)
    return q1 @ np.diag(svals) @ q2.T


def random_market(
    rng: np.random.Generator,
    n: int,
    zeta_scale: float = 0.3,
    r_range: tuple[float, float] = (0.0, 0.04),
    c_range: tuple[float, float] = (-0.1, -0.005),
) -> DerivedMarket:
    """Random market with direct control of the price of risk."""
    sigma = random_sigma(rng, n)
    zeta = rng.normal(0.0, zeta_scale, n)
    r = rng.uniform(*r_range)
    c_net = rng.uniform(*c_range)
    mu = r + sigma @ zeta
    return build_derived(MarketSpec(r=r, c_net=c_net, mu=mu, sigma=sigma))
