import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from barrieropt import (
    C2Function,
    ConeViolation,
    DegenerateVolatility,
    DimensionMismatch,
    DomainViolation,
    FictitiousParam,
    GbmCoefficients,
    favourability,
    generator_apply,
    norm_cdf,
    ruin_curve,
    shifted_price_of_risk,
    support_delta,
    wealth_coefficients,
)
from conftest import C_NET, R, random_market


def const_fn(c: float) -> C2Function:
    return C2Function(value=lambda x: c, deriv=lambda x: 0.0, deriv2=lambda x: 0.0)


IDENTITY_FN = C2Function(value=lambda x: x, deriv=lambda x: 1.0, deriv2=lambda x: 0.0)


class TestSupportFunction:
    def test_zero(self):
        assert support_delta(FictitiousParam.zero()) == 0.0

    def test_sign_flip(self):
        assert support_delta(FictitiousParam(-0.0375)) == 0.0375

    def test_cone_violation(self):
        with pytest.raises(ConeViolation):
            FictitiousParam(0.01)

    @given(nu1=st.floats(min_value=-50.0, max_value=0.0),
           budget=st.floats(min_value=-5.0, max_value=1.0))
    def test_duality(self, nu1, budget):
        # delta(nu) + w'nu >= 0 exactly when 1'w <= 1 (w in the constraint set)
        nu = FictitiousParam(nu1)
        w = np.array([budget])  # 1'w = budget <= 1
        gap = support_delta(nu) + float(w @ nu.vector(1))
        assert gap >= -1e-15


class TestShiftedPriceOfRisk:
    def test_zero_shift_exact(self, market_a):
        assert np.array_equal(shifted_price_of_risk(market_a, FictitiousParam.zero()),
                              market_a.zeta)

    def test_market_a_shift(self, market_a):
        out = shifted_price_of_risk(market_a, FictitiousParam(-0.0375))
        assert out == pytest.approx([0.25], rel=1e-14)

    def test_market_a_reward_shift(self, market_a):
        # frozen from 40-digit evaluation of 0.4 + nu1 / 0.25
        out = shifted_price_of_risk(market_a, FictitiousParam(-0.086792958264701669))
        assert out == pytest.approx([0.052828166941193322], rel=1e-12)


class TestWealthCoefficients:
    def test_market_a_budget_strategy(self, market_a):
        gbm = wealth_coefficients(market_a, FictitiousParam(-0.0375), np.array([1.0]),
                                  C_NET, R)
        # hand evaluation: (r + delta + c) + w(mu + nu - r) - w^2 Sigma / 2
        assert gbm.log_drift == pytest.approx(0.03875, rel=1e-12)
        assert gbm.log_vol == pytest.approx(0.25, rel=1e-12)

    def test_market_b_log_optimal(self, market_b):
        gbm = wealth_coefficients(market_b, FictitiousParam.zero(), market_b.w_o,
                                  C_NET, R)
        assert gbm.log_drift == pytest.approx(-0.0172, rel=1e-12)
        assert gbm.log_vol == pytest.approx(0.16, rel=1e-12)

    def test_riskless(self, market_a):
        gbm = wealth_coefficients(market_a, FictitiousParam.zero(), np.array([0.0]),
                                  C_NET, R)
        assert gbm.log_drift == pytest.approx(R + C_NET, rel=1e-14)
        assert gbm.log_vol == 0.0

    def test_dimension_check(self, market_a):
        with pytest.raises(DimensionMismatch):
            wealth_coefficients(market_a, FictitiousParam.zero(),
                                np.array([0.1, 0.2]), C_NET, R)

    def test_vol_norm_invariant(self):
        with pytest.raises(DimensionMismatch):
            GbmCoefficients(log_drift=0.0, log_vol=0.5, vol_vector=np.array([0.3]))


class TestFavourability:
    def test_market_b_unfavourable(self, market_b):
        beta = favourability(market_b, FictitiousParam.zero(), R, C_NET)
        assert beta == pytest.approx(-0.0172, rel=1e-12)
        assert beta < 0.0

    def test_market_a_shifted_favourable(self, market_a):
        beta = favourability(market_a, FictitiousParam(-0.0375), R, C_NET)
        assert beta == pytest.approx(0.03875, rel=1e-12)
        assert beta > 0.0

    def test_zero_excess(self):
        import barrieropt as bo

        dm = bo.build_derived(bo.MarketSpec(r=0.02, c_net=-0.03,
                                            mu=[0.02, 0.02], sigma=np.eye(2)))
        assert favourability(dm, FictitiousParam.zero(), 0.02, -0.03) == pytest.approx(
            -0.01, rel=1e-14)

    @pytest.mark.parametrize("seed", range(8))
    def test_equals_log_optimal_drift(self, seed):
        # beta_nu is the log drift of the shifted market's log-optimal wealth
        rng = np.random.default_rng(seed)
        dm = random_market(rng, int(rng.integers(1, 5)))
        nu = FictitiousParam(-float(rng.uniform(0.0, 0.5)))
        w = np.linalg.solve(dm.sigma.T, shifted_price_of_risk(dm, nu))
        gbm = wealth_coefficients(dm, nu, w, dm.c_net, dm.r)
        beta = favourability(dm, nu, dm.r, dm.c_net)
        assert beta == pytest.approx(gbm.log_drift, rel=1e-12, abs=1e-14)


class TestRuinCurve:
    def test_on_barrier_zero_drift(self):
        assert ruin_curve(0.0, 0.3, 1.0, 1.0, 5.0) == pytest.approx(0.5, abs=1e-15)

    def test_market_b_fixture(self):
        # frozen: Phi(0.82158430743239726) at 40 digits
        val = ruin_curve(-0.0172, 0.16, 1.5, 1.0, 100.0)
        assert val == pytest.approx(0.79434323823927143, rel=1e-13)

    def test_monotone_to_one_when_unfavourable(self):
        prev = 0.0
        for t in (1e1, 1e2, 1e3, 1e4):
            cur = ruin_curve(-0.0172, 0.16, 1.5, 1.0, t)
            assert cur >= prev
            prev = cur
        assert prev > 1.0 - 1e-6

    def test_degenerate_volatility(self):
        with pytest.raises(DegenerateVolatility):
            ruin_curve(-0.01, 0.0, 1.5, 1.0, 10.0)

    def test_domain(self):
        with pytest.raises(DomainViolation):
            ruin_curve(-0.01, 0.2, 0.9, 1.0, 10.0)
        with pytest.raises(DomainViolation):
            ruin_curve(-0.01, 0.2, 1.5, 1.0, 0.0)

    def test_norm_cdf_accuracy(self):
        from scipy.special import ndtr

        zs = np.linspace(-8.0, 8.0, 401)
        errs = [abs(norm_cdf(z) - ndtr(z)) for z in zs]
        assert max(errs) <= 1e-13


class TestGenerator:
    def test_constant_function(self, market_a):
        rng = np.random.default_rng(0)
        for _ in range(10):
            w = rng.normal(size=1)
            nu = FictitiousParam(-abs(rng.normal()))
            assert generator_apply(market_a, nu, w, R, C_NET, const_fn(3.7), 1.3) == 0.0

    def test_identity_riskless(self, market_a):
        out = generator_apply(market_a, FictitiousParam.zero(), np.array([0.0]),
                              R, C_NET, IDENTITY_FN, 2.0)
        assert out == pytest.approx((R + C_NET) * 2.0, rel=1e-14)

    def test_domain(self, market_a):
        with pytest.raises(DomainViolation):
            generator_apply(market_a, FictitiousParam.zero(), np.array([0.0]),
                            R, C_NET, IDENTITY_FN, 0.0)

    def test_negation(self):
        fn = -IDENTITY_FN
        assert fn(2.0) == -2.0
        assert fn.deriv(2.0) == -1.0
        assert fn.deriv2(2.0) == 0.0
