"""Exception hierarchy.

Two families matter to callers: :class:`ConfigError` covers malformed or
inadmissible inputs (CLI exit code 1), :class:`RegimeError` covers inputs that
are well formed but violate a solver's market-regime preconditions (CLI exit
code 2), so shell pipelines can tell misuse apart from "this market does not
admit this problem".
"""


class BarrierOptError(Exception):
    """Base class for all library errors."""


class ConfigError(BarrierOptError):
    """Malformed or inadmissible input (bad file, bad shape, bad domain)."""


class RegimeError(BarrierOptError):
    """Valid input, but the market regime does not admit the requested problem."""


# --- configuration / input errors -------------------------------------------

class DimensionMismatch(ConfigError):
    """Vector or matrix shapes are inconsistent with the asset count."""


class InvalidCashFlow(ConfigError):
    """Net cash-flow rate must be a strictly negative finite number."""


class SingularVolatility(ConfigError):
    """Volatility matrix is singular or too ill-conditioned to trust."""


class MarketFormatError(ConfigError):
    """Market configuration file violates the strict JSON schema."""


class InvalidBarriers(ConfigError):
    """Barrier levels are missing, unordered, or non-positive."""


class DomainViolation(ConfigError):
    """Argument lies outside the domain of the requested function."""


class DegenerateVolatility(ConfigError):
    """An operation that needs strictly positive volatility got zero."""


class WrongDriftDirection(ConfigError):
    """Expected-exit-time oracle called with drift pointing away from the barrier."""


class ConstraintViolation(ConfigError):
    """Strategy violates the budget constraint (weights summing above one)."""


# --- regime errors -----------------------------------------------------------

class RegimeViolation(RegimeError):
    """The solved-for exponent has the wrong sign for this problem's regime."""


class LogOptimalDegeneracy(RegimeError):
    """Goal-problem exponent lands on the excluded log-optimal point (alpha = -1)."""


class ZeroFavourability(RegimeError):
    """Expected-time problems are undefined when the optimal growth rate is zero."""


class RegimeMismatch(RegimeError):
    """Requested a value function that the solved regime does not define."""


class FavourabilityViolation(RegimeError):
    """Market favourability has the wrong sign for the requested reward problem."""


class RootOutOfRange(RegimeError):
    """No root of the pricing quadratic lies in the admissible interval."""


class NoRealRoots(RegimeError):
    """Pricing quadratic has a negative discriminant."""


class DegenerateEquation(RegimeError):
    """Both leading coefficients of the pricing quadratic vanish."""


class ConeViolation(RegimeError):
    """Fictitious drift shift lies outside the nonpositive cone."""
