#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "mvasicek/model.hpp"
#include "mvasicek/numerics.hpp"
#include "oracles.hpp"

namespace mvasicek {
namespace {

// Worked example for bond prices: T = 1, a = 0.12, b = 1.9, sigma = 0.35, p = 0.034, q = 0.12.
const ModelParams kExample1{0.12, 1.9, 0.35, 0.034, 0.12, 0.02};
// Fitted to the 2007-12-31 Treasury curve.
const ModelParams kDec2007{0.1635, 1.8952, 0.7247, 0.0909, 0.2100, 0.0240};

ModelParams random_params(std::mt19937_64& rng, bool classical) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    ModelParams m;
    m.a = 0.01 + 0.2 * u(rng);
    m.b = 0.1 + 2.5 * u(rng);
    m.sigma = 0.01 + 0.8 * u(rng);
    m.q = 0.02 + 1.0 * u(rng);
    m.p = classical ? 0.0 : -m.q + 0.001 + 2.0 * u(rng);
    m.r0 = 0.1 * u(rng);
    return m;
}

TEST(ModelParams, Validation) {
    EXPECT_TRUE(kExample1.valid());
    auto bad = kExample1;
    bad.p = -bad.q;
    EXPECT_FALSE(bad.valid());
    EXPECT_THROW(bad.validate(), InputError);
    bad = kExample1;
    bad.r0 = -0.01;
    EXPECT_FALSE(bad.valid());
    bad = kExample1;
    bad.sigma = 0.0;
    EXPECT_FALSE(bad.valid());
}

TEST(LFunction, MemorylessIsOne) {
    auto m = kExample1;
    m.p = 0.0;
    for (double t : {0.0, 0.5, 3.0, 40.0}) EXPECT_EQ(l_fn(t, m), 1.0);
}

TEST(LFunction, ValueAtZero) {
    // l(0) = 1 - p / (2 (p + q)) = 0.889610389610...
    EXPECT_NEAR(l_fn(0.0, kExample1), 1.0 - 0.034 / (2.0 * 0.154), 1e-15);
    EXPECT_NEAR(l_fn(0.0, kExample1), 0.889610389610390, 1e-12);
}

TEST(LFunction, DecaysToOne) {
    std::mt19937_64 rng(1);
    for (int k = 0; k < 50; ++k) {
        const auto m = random_params(rng, false);
        EXPECT_NEAR(l_fn(20.0 / m.q, m), 1.0, 1e-12);
    }
}

TEST(LFunctionProperty, BoundedAndMonotoneTowardOne) {
    std::mt19937_64 rng(2);
    for (int k = 0; k < 200; ++k) {
        const auto m = random_params(rng, false);
        const double upper = std::max(1.0, 1.0 - m.p / (2.0 * (m.p + m.q))) + 1e-12;
        double prev_gap = std::fabs(l_fn(0.0, m) - 1.0);
        for (double t = 0.0; t <= 30.0; t += 0.05) {
            const double l = l_fn(t, m);
            ASSERT_GT(l, 0.0);
            ASSERT_LE(l, upper);
            const double gap = std::fabs(l - 1.0);
            ASSERT_LE(gap, prev_gap + 1e-15);
            prev_gap = gap;
        }
    }
}

TEST(MFunction, ZeroCases) {
    EXPECT_EQ(m_fn(0.0, kExample1), 0.0);
    auto m = kExample1;
    m.p = 0.0;
    EXPECT_EQ(m_fn(2.0, m), 0.0);
}

TEST(MFunction, MatchesDefiningIntegral) {
    const auto& m = kExample1;
    const double direct = numerics::integrate(
        [&](double s) { return m.p * std::exp(-(m.p + m.q) * s) * (1.0 - std::exp(-m.b * (1.0 - s))); },
        0.0, 1.0);
    EXPECT_NEAR(m_fn(1.0, m), direct, 1e-10);
    // mpmath reference: 0.01773020608481563...
    EXPECT_NEAR(m_fn(1.0, m), 0.0177302060848156, 1e-15);
}

TEST(MFunction, ConfluentBranchMatchesIntegral) {
    ModelParams m{0.1, 1.0, 0.3, 0.4, 0.6, 0.02}; // p + q = b exactly
    for (double t : {0.3, 1.0, 5.0}) {
        const double direct = numerics::integrate(
            [&](double s) { return m.p * std::exp(-(m.p + m.q) * s) * (1.0 - std::exp(-m.b * (t - s))); },
            0.0, t);
        EXPECT_NEAR(m_fn(t, m), direct, 1e-12) << t;
    }
}

TEST(MFunctionProperty, BranchContinuity) {
    ModelParams exact{0.1, 1.0, 0.3, 0.4, 0.6, 0.02};
    ModelParams near = exact;
    near.q += 1e-8; // just outside the confluence threshold
    for (double t = 0.0; t <= 10.0; t += 0.25) {
        EXPECT_NEAR(m_fn(t, exact), m_fn(t, near), 1e-7) << t;
    }
}

TEST(CFactor, Values) {
    EXPECT_EQ(c_factor(0.7, 0.7, kExample1), 0.0);
    EXPECT_NEAR(c_factor(0.0, 1.0, kExample1), 0.447595463567034, 1e-13);
    const double direct = numerics::integrate([](double s) { return std::exp(-1.9 * s); }, 0.0, 1.0);
    EXPECT_NEAR(c_factor(0.0, 1.0, kExample1), direct, 1e-12);
    EXPECT_NEAR(c_factor(0.0, 15.0, kExample1), 1.0 / 1.9, 1e-9);
    EXPECT_THROW(c_factor(1.0, 0.5, kExample1), InputError);
}

TEST(AFactor, Values) {
    EXPECT_EQ(a_factor(1.0, 1.0, kExample1), 0.0);
    // mpmath with nested quadrature of the defining integrals: 0.02889538280975107636...
    EXPECT_NEAR(a_factor(0.0, 1.0, kExample1), 0.0288953828097511, 1e-13);
    EXPECT_THROW(a_factor(2.0, 1.0, kExample1), InputError);
}

TEST(AFactor, ClassicalReduction) {
    std::mt19937_64 rng(4);
    for (int k = 0; k < 100; ++k) {
        const auto m = random_params(rng, true);
        const oracle::Vasicek v{m.a, m.b, m.sigma};
        const double tau = 0.1 + 10.0 * std::uniform_real_distribution<double>(0, 1)(rng);
        EXPECT_NEAR(a_factor(0.0, tau, m), -v.log_A(tau), 1e-12 * (1.0 + std::fabs(v.log_A(tau))));
    }
}

TEST(AIntegral, AnalyticMatchesQuadrature) {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.01, 25.0);
    for (int k = 0; k < 300; ++k) {
        const auto m = random_params(rng, k % 5 == 0);
        const double tau = u(rng);
        const double quad = a_integral_quadrature(tau, m);
        EXPECT_NEAR(a_integral(tau, m), quad, 1e-10 * std::max(1.0, quad)) << k;
    }
}

TEST(AIntegral, NearConfluenceFallsBackToQuadrature) {
    ModelParams m{0.1, 1.0, 0.3, 0.4, 0.6 + 1e-4, 0.02};
    EXPECT_NEAR(a_integral(3.0, m), a_integral_quadrature(3.0, m), 1e-12);
}

TEST(DFactor, Values) {
    EXPECT_EQ(d_factor(1.0, 1.0, kExample1), 0.0);
    auto m = kExample1;
    m.p = 0.0;
    EXPECT_EQ(d_factor(0.2, 1.0, m), 0.0);
    EXPECT_NEAR(d_factor(0.5, 1.0, kExample1),
                0.35 / 1.9 * std::exp(-0.077) * m_fn(0.5, kExample1), 1e-16);
}

TEST(BondPrice, MaturityIdentity) {
    EXPECT_DOUBLE_EQ(bond_price(ModelState{0.8, 0.05, 0.3}, 0.8, kExample1), 1.0);
    EXPECT_THROW(bond_price(ModelState{1.2, 0.05, 0.3}, 1.0, kExample1), InputError);
}

TEST(BondPrice, ClassicalReduction) {
    std::mt19937_64 rng(6);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int k = 0; k < 100; ++k) {
        const auto m = random_params(rng, true);
        const oracle::Vasicek v{m.a, m.b, m.sigma};
        const double t = 2.0 * u(rng);
        const double T = t + 0.05 + 15.0 * u(rng);
        const double r = -0.02 + 0.15 * u(rng);
        const double u_state = u(rng) - 0.5; // irrelevant when p = 0
        const double P = bond_price(ModelState{t, r, u_state}, T, m);
        EXPECT_LT(oracle::rel_diff(P, v.bond(T - t, r)), 1e-12) << k;
    }
}

TEST(BondPrice, DecreasingInShortRate) {
    auto m = kExample1;
    double prev = 2.0;
    for (double r0 = 0.0; r0 <= 0.1 + 1e-12; r0 += 0.005) {
        m.r0 = r0;
        const double P = bond_price(1.0, m);
        EXPECT_GT(P, 0.0);
        EXPECT_LT(P, prev);
        prev = P;
    }
}

TEST(BondPrice, TimeZeroMatchesYieldFormula) {
    for (double T : {0.25, 1.0, 7.0}) {
        const double Y = (a_factor(0, T, kDec2007) + c_factor(0, T, kDec2007) * kDec2007.r0) / T;
        EXPECT_NEAR(bond_price(T, kDec2007), std::exp(-T * Y), 1e-15);
    }
}

TEST(BondPriceProperty, AffineInState) {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int k = 0; k < 200; ++k) {
        const auto m = random_params(rng, false);
        const double t = 0.5 + 0.5 * u(rng), T = t + 1.0 + u(rng) * 0.5;
        const double dr = 0.05 * u(rng), du = 0.5 * u(rng);
        const double r1 = 0.05 * u(rng), u1 = u(rng);
        const double r2 = 0.05 * u(rng), u2 = u(rng);
        const double ratio1 = bond_price({t, r1 + dr, u1 + du}, T, m) / bond_price({t, r1, u1}, T, m);
        const double ratio2 = bond_price({t, r2 + dr, u2 + du}, T, m) / bond_price({t, r2, u2}, T, m);
        EXPECT_LT(oracle::rel_diff(ratio1, ratio2), 1e-12);
    }
}

TEST(YieldAt, ConsistentWithBondPrice) {
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int k = 0; k < 200; ++k) {
        const auto m = random_params(rng, false);
        const ModelState s{u(rng), 0.1 * u(rng), u(rng) - 0.5};
        const double T = s.t + 0.01 + 10.0 * u(rng);
        const double Y = yield_at(s, T, m);
        const double P = bond_price(s, T, m);
        EXPECT_NEAR(-std::log(P) / (T - s.t), Y, 1e-13);
        EXPECT_LT(oracle::rel_diff(std::exp(-(T - s.t) * Y), P), 1e-13);
    }
}

TEST(YieldAt, ShortTenorLimit) {
    const ModelState s{0.0, kExample1.r0, 0.0};
    EXPECT_NEAR(yield_at(s, 1e-6, kExample1), kExample1.r0, 1e-5);
}

TEST(YieldAt, RequiresPositiveTenor) {
    EXPECT_THROW(yield_at(ModelState{1.0, 0.0, 0.0}, 1.0, kExample1), InputError);
}

TEST(YieldAt, FittedCurveRegression) {
    // Independent mpmath evaluation (30 digits, nested quadrature of m).
    const std::vector<std::pair<double, double>> expected = {
        {1.0 / 12.0, 0.0281300839210898944}, {0.25, 0.0328382079472855985},
        {0.5, 0.0349679752022938986},        {1.0, 0.0335265240108389118},
        {2.0, 0.0304204323366395741},        {3.0, 0.0303890924288268966},
        {5.0, 0.0330895145509878232},        {7.0, 0.0359844739577163903},
        {10.0, 0.0393155488485618710},       {20.0, 0.0446406640231961144}};
    for (const auto& [T, Y] : expected) {
        EXPECT_NEAR(yield_at(T, kDec2007), Y, 1e-14) << T;
    }
}

TEST(DiscountVol, Values) {
    EXPECT_EQ(discount_vol(1.0, 1.0, kExample1), 0.0);
    ModelParams m{0.08, 1.5, 0.3, 0.0, 0.08, 0.025};
    EXPECT_NEAR(discount_vol(0.0, 1.0, m), -0.155373967970314, 1e-14);
}

TEST(ModelProperty, ClassicalReductionOfAllQuantities) {
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int k = 0; k < 200; ++k) {
        const auto m = random_params(rng, true);
        const oracle::Vasicek v{m.a, m.b, m.sigma};
        const double t = u(rng), T = t + 0.1 + 10.0 * u(rng);
        const double r = 0.1 * u(rng);
        EXPECT_LT(oracle::rel_diff(bond_price({t, r, 0.3}, T, m), v.bond(T - t, r)), 1e-12);
        EXPECT_LT(oracle::rel_diff(yield_at({t, r, 0.3}, T, m), v.yield(T - t, r)), 1e-12);
        EXPECT_LT(oracle::rel_diff(discount_vol(t, T, m), v.discount_vol(t, T)), 1e-12);
    }
}

TEST(GaussianTransition, ClassicalMoments) {
    ModelParams m{0.1, 1.2, 0.25, 0.0, 0.3, 0.03};
    const oracle::Vasicek v{m.a, m.b, m.sigma};
    const auto tr = gaussian_transition(0.0, 2.0, m);
    EXPECT_NEAR(tr.mean_r(m.r0, 0.0), v.mean(2.0, m.r0), 1e-14);
    EXPECT_NEAR(tr.var_r, v.variance(2.0), 1e-12);
    // u loads e^{qs} when p = 0.
    EXPECT_NEAR(tr.var_u, std::expm1(2.0 * m.q * 2.0) / (2.0 * m.q), 1e-12);
    EXPECT_EQ(tr.decay_u, 0.0);
}

TEST(GaussianTransition, ChainsOverSubintervals) {
    // Two half steps compose into one full step (mean and variance of r, u).
    const auto& m = kExample1;
    const auto full = gaussian_transition(0.2, 1.0, m);
    const auto h1 = gaussian_transition(0.2, 0.5, m);
    const auto h2 = gaussian_transition(0.7, 0.5, m);
    const double r = 0.04, u = 0.3;
    const double mid_r = h1.mean_r(r, u);
    EXPECT_NEAR(h2.mean_r(mid_r, u), full.mean_r(r, u), 1e-14);
    // Var of r after two steps: propagate h1 noise through h2's linear map.
    const double var_r = h2.decay_r * h2.decay_r * h1.var_r +
                         2.0 * h2.decay_r * h2.decay_u * h1.cov_ru +
                         h2.decay_u * h2.decay_u * h1.var_u + h2.var_r;
    const double var_u = h1.var_u + h2.var_u;
    EXPECT_NEAR(var_r, full.var_r, 1e-12);
    EXPECT_NEAR(var_u, full.var_u, 1e-12);
}

} // namespace
} // namespace mvasicek
