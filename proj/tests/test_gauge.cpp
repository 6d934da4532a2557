#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "escape_gauge/gauge.hpp"
#include "escape_gauge/rng.hpp"

using namespace escape_gauge;

TEST(Gauge, KnownValuesDepthOne) {
    const GaugeSpec g(1, 1.0);
    EXPECT_NEAR(gauge_h(g, std::exp(-2.0)), 0.0366312777774684, 1e-15);
    EXPECT_NEAR(gauge_h(g, std::exp(-1.0)), 0.1353352832366127, 1e-15);
    EXPECT_NEAR(gauge_G(g, std::exp(-4.0)), gauge_h(g, std::exp(-2.0)), 1e-15);
}

TEST(Gauge, DeltaIsReciprocalTower) {
    const GaugeSpec g1(1, 1.0);
    EXPECT_NEAR(g1.delta_n(), std::exp(-1.0), 1e-16);
    const GaugeSpec g2(2, 1.0);
    EXPECT_NEAR(g2.delta().log_inverse(), std::exp(1.0), 1e-15);
    const GaugeSpec g3(3, 2.0);
    EXPECT_EQ(g3.inverse_delta().depth(), 1);
    EXPECT_NEAR(g3.delta().log_inverse(), 1618.177991912653, 1e-9);
    EXPECT_EQ(g3.delta_n(), 0.0);
}

TEST(Gauge, RejectsOutsideDomain) {
    const GaugeSpec g(1, 2.0); // delta = e^-2
    EXPECT_THROW(gauge_h(g, 0.5), DomainError);
    EXPECT_THROW(gauge_h(g, -1.0), DomainError);
    EXPECT_NO_THROW(gauge_h(g, std::exp(-2.0)));
    EXPECT_THROW(gauge_G(g, std::exp(-3.0)), DomainError);
    EXPECT_THROW(GaugeSpec(0, 1.0), DomainError);
    EXPECT_THROW(GaugeSpec(1, 0.0), DomainError);
}

TEST(Gauge, DeepDomainPointsStayFinite) {
    const GaugeSpec g(3, 1.0);
    const SmallReal t = SmallReal::from_log_inverse(5000.0);
    EXPECT_EQ(t.value(), 0.0);
    const double lh = gauge_log_h(g, t);
    EXPECT_NEAR(lh, -10000.0 + std::log(iter_log(2, 5000.0)), 1e-9);
}

TEST(GaugeLemmas, ScalingOracle) {
    const GaugeSpec g(1, 1.0);
    const auto m = scaling_margin(g, SmallReal::from_value(std::exp(-4.0)), 2.0);
    EXPECT_FALSE(m.log_scale);
    EXPECT_NEAR(m.lhs, 0.004437302147584765, 1e-15);
    EXPECT_NEAR(m.rhs, 0.005367402046440189, 1e-15);
    EXPECT_NEAR(m.margin, 0.0009300998988554245, 1e-15);
    EXPECT_THROW(scaling_margin(g, SmallReal::from_value(std::exp(-4.0)), 1.0), DomainError);
}

TEST(GaugeLemmas, LemmaInputBound) {
    EXPECT_NEAR(lemma_input_bound_log_inverse(1), 2.0, 0);
    EXPECT_NEAR(lemma_input_bound_log_inverse(2), std::exp(2.0), 1e-12);
    const GaugeSpec g(2, 1.0);
    std::vector<SmallReal> ts{SmallReal::from_log_inverse(5.0)}; // above 1/exp^2(2)
    EXPECT_THROW(superadditivity_margin(g, ts), DomainError);
    std::vector<SmallReal> none;
    EXPECT_THROW(superadditivity_margin(g, none), DomainError);
}

TEST(GaugeLemmas, ConcavityMarginPositive) {
    for (int n = 1; n <= 3; ++n)
        for (double gamma : {0.5, 1.0, 2.0}) {
            const GaugeSpec g(n, gamma);
            const double u0 = 2.0 * g.delta().log_inverse();
            for (double f : {1.0, 1.5, 10.0, 1e3}) {
                const auto c = gauge_concavity_margin(g, SmallReal::from_log_inverse(u0 * f));
                EXPECT_GT(c.margin, 0.0) << "n=" << n << " gamma=" << gamma << " f=" << f;
                EXPECT_GT(c.g_prime, 0.0);
            }
        }
}

TEST(GaugeLemmas, ConcavityMatchesFiniteDifferences) {
    const GaugeSpec g(1, 1.0);
    // G(t) = t log(1/sqrt t)^gamma on (0, e^-2]
    for (double t : {1e-3, 1e-2, 0.05, 0.1}) {
        const double h = 1e-6 * t;
        const double fd = (gauge_G(g, t + h) - gauge_G(g, t - h)) / (2 * h);
        EXPECT_NEAR(gauge_concavity_margin(g, t).g_prime, fd, 1e-6 * std::abs(fd));
        const double second = (gauge_G(g, t + h) - 2 * gauge_G(g, t) + gauge_G(g, t - h)) / (h * h);
        EXPECT_LT(second, 0.0);
    }
}

// Property: all three inequalities hold on random tuples for each (n, gamma).
class GaugeSuite : public ::testing::TestWithParam<std::tuple<int, double>> {};

TEST_P(GaugeSuite, RandomTuplesSatisfyInequalities) {
    const auto [n, gamma] = GetParam();
    const GaugeSpec g(n, gamma);
    const GaugeSuiteResult r = run_gauge_suite(g, 2000, 1234);
    EXPECT_EQ(r.domain_errors, 0u);
    EXPECT_GE(r.min_scaling, -1e-12);
    EXPECT_GE(r.min_superadditivity, -1e-12);
    EXPECT_GE(r.min_product, -1e-12);
    EXPECT_GE(r.min_concavity, 0.0);
    EXPECT_TRUE(r.passed(1e-12));
}

INSTANTIATE_TEST_SUITE_P(DepthsAndExponents, GaugeSuite,
                         ::testing::Combine(::testing::Values(1, 2, 3), ::testing::Values(0.5, 1.0, 2.0)));

TEST(GaugeSuite, SameSeedSameResult) {
    const GaugeSpec g(2, 1.0);
    const auto a = run_gauge_suite(g, 500, 9), b = run_gauge_suite(g, 500, 9);
    EXPECT_EQ(a.min_scaling, b.min_scaling);
    EXPECT_EQ(a.min_product, b.min_product);
    EXPECT_EQ(a.min_superadditivity, b.min_superadditivity);
}
