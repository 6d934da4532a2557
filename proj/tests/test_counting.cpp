#include <cmath>
#include <sstream>
#include <vector>

#include <gtest/gtest.h>

#include "escape_gauge/counting.hpp"

using namespace escape_gauge;

TEST(PoleCount, KnownValue) {
    const GrowthModel m(1.0, 1);
    EXPECT_EQ(pole_count(m, 3.0), 928);
    EXPECT_EQ(pole_count(m, 2.0), 0);
    EXPECT_EQ(pole_count(m, 0.5), 0);
}

TEST(PoleCount, MatchesRingSum) {
    const GrowthModel m(1.0, 1);
    for (std::int64_t K : {9, 10, 25, 400}) {
        std::int64_t s = 0;
        for (std::int64_t k = 9; k <= K; ++k) s += 2 * n_index(m, k);
        EXPECT_EQ(pole_count(m, p_of(m, K + 0.5)), s);
    }
}

TEST(PoleCount, StepsAtRingRadii) {
    const GrowthModel m(2.0, 1);
    const double r = p_of(m, 50.0);
    EXPECT_EQ(pole_count(m, r * (1 + 1e-12)) - pole_count(m, r * (1 - 1e-12)), 2 * n_index(m, 50));
}

TEST(PoleCount, RejectsHugeRadius) {
    const GrowthModel m(1.0, 1);
    EXPECT_THROW(pole_count(m, 100.0), DomainError);
}

TEST(CountingN, IntegralOfCountOverRadius) {
    const GrowthModel m(1.0, 1);
    const double r = p_of(m, 60.5);
    // N(r) = int n(t)/t dt with n piecewise constant
    double integral = 0.0;
    const int steps = 200000;
    const double a = std::log(p_of(m, 9.0)) - 1e-9, b = std::log(r);
    for (int i = 0; i < steps; ++i) {
        const double x = a + (b - a) * (i + 0.5) / steps;
        integral += static_cast<double>(pole_count(m, std::exp(x))) * (b - a) / steps;
    }
    EXPECT_NEAR(counting_N(m, r) / integral, 1.0, 1e-3);
}

// Property: n(r) over 2 int q'^2 s ds approaches 1 as r grows.
TEST(Asymptote, RatioApproachesOne) {
    for (double rho : {1.0, 2.0}) {
        const GrowthModel m(rho, 1);
        double prev = INFINITY;
        for (std::int64_t K : {1000, 10000, 100000, 1000000}) {
            const auto rep = count_report(m, p_of(m, K + 0.5));
            const double err = std::abs(rep.ratio - 1.0);
            EXPECT_LT(err, prev) << "rho=" << rho << " K=" << K;
            prev = err;
        }
        EXPECT_LT(prev, 1e-3);
    }
}

TEST(Asymptote, BelowStartIsMinusInfinity) {
    const GrowthModel m(1.0, 1);
    EXPECT_TRUE(std::isinf(pole_count_asymptote(m, 2.1).log_integral));
}

TEST(Asymptote, ComparatorTracksIntegral) {
    const GrowthModel m(1.0, 1);
    for (std::int64_t K : {1000, 100000}) {
        const auto a = pole_count_asymptote(m, p_of(m, K + 0.5));
        EXPECT_NEAR(std::exp(a.log_integral - a.log_comparator), 1.0, 0.1);
    }
}

TEST(Order, EstimateNearRhoOverWideRange) {
    for (double rho : {1.0, 2.0}) {
        const GrowthModel m(rho, 1);
        std::vector<std::int64_t> ks;
        for (int i = 0; i <= 12; ++i) ks.push_back(static_cast<std::int64_t>(std::llround(100.0 * std::pow(10.0, i * 4.5 / 12))));
        const auto est = order_estimate(m, half_ring_radii(m, ks));
        EXPECT_EQ(est.used, ks.size());
        EXPECT_NEAR(est.slope / rho, 1.0, 0.15);
    }
}

TEST(Order, EstimateImprovesWithRange) {
    const GrowthModel m(1.0, 1);
    auto fit = [&](double lo, double hi) {
        std::vector<std::int64_t> ks;
        for (int i = 0; i <= 10; ++i) ks.push_back(static_cast<std::int64_t>(std::llround(lo * std::pow(hi / lo, i / 10.0))));
        return order_estimate(m, half_ring_radii(m, ks)).slope;
    };
    EXPECT_LT(std::abs(fit(1e3, 1e6) - 1.0), std::abs(fit(20, 60) - 1.0));
}

TEST(Order, TooFewSamples) {
    const GrowthModel m(1.0, 1);
    EXPECT_THROW(order_estimate(m, half_ring_radii(m, {20, 30, 40})), InsufficientRange);
}

TEST(CountCsv, Header) {
    const GrowthModel m(1.0, 1);
    std::ostringstream os;
    write_count_csv(os, {count_report(m, 3.0)});
    EXPECT_EQ(os.str().substr(0, os.str().find('\n')), "r,exact,asymptote_log,ratio");
}
