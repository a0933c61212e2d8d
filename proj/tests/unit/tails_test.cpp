#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "ustat/tails.hpp"

using namespace ustat;

TEST(Tails, SurvivalIsRightContinuousStep) {
    const EmpiricalTail t({3, 1, 2, 2});
    EXPECT_EQ(t.survival(0.5), 1.0);
    EXPECT_EQ(t.survival(1.0), 0.75);
    EXPECT_EQ(t.survival(1.999), 0.75);
    EXPECT_EQ(t.survival(2.0), 0.25);
    EXPECT_EQ(t.survival(3.0), 0.0);
    EXPECT_THROW(EmpiricalTail({-1.0}), std::invalid_argument);
    EXPECT_THROW(EmpiricalTail({1.0, 2.0}, {0.5, 0.6}), std::invalid_argument);
}

TEST(Tails, TailIntegralExamples) {
    EXPECT_DOUBLE_EQ(EmpiricalTail::point_mass(1.5).tail_integral(3.0, 2.0), 0.25 / 2.0);
    EXPECT_DOUBLE_EQ(EmpiricalTail::point_mass(3.0).tail_integral(2.0, 2.0), 0.5);
    // P(Y > 2u) = 1 on [0, 1/2), 2/3 on [1/2, 1)
    EXPECT_NEAR(EmpiricalTail({1, 2, 3}).tail_integral(2.0, 1.0), 5.0 / 6.0, 1e-15);
    EXPECT_NEAR(oracle::tail_integral_quadrature({1, 2, 3}, 2.0, 1.0), 5.0 / 6.0, 1e-12);
    EXPECT_THROW((void)EmpiricalTail({1.0}).tail_integral(0.0, 1.0), std::invalid_argument);
}

TEST(Tails, TailIntegralMatchesQuadrature) {
    const Stream s(21);
    for (std::uint64_t c = 0; c < 30; ++c) {
        const std::size_t size = 1 + c * 3;
        std::vector<double> y(size);
        for (std::size_t i = 0; i < size; ++i) y[i] = std::exp(s.normal(c * 1000 + i));
        const double t = 0.2 + 3.0 * s.uniform(c * 1000 + 999);
        const double q = 0.5 + 4.0 * s.uniform(c * 1000 + 998);
        EXPECT_NEAR(EmpiricalTail(y).tail_integral(t, q), oracle::tail_integral_quadrature(y, t, q), 1e-10);
    }
}

TEST(Tails, TailIntegralMonotone) {
    const EmpiricalTail a({0.5, 1.0, 2.0, 4.0}), b({0.6, 1.0, 2.5, 4.0});
    double previous = 1e9;
    for (double t = 0.1; t < 6.0; t += 0.1) {
        const double v = a.tail_integral(t, 2.0);
        EXPECT_LE(v, previous);
        EXPECT_LE(v, b.tail_integral(t, 2.0));
        previous = v;
    }
}

TEST(Tails, WeakNormExamples) {
    EXPECT_DOUBLE_EQ(EmpiricalTail::point_mass(2.0).weak_lp_norm(3.0), 8.0);
    EXPECT_DOUBLE_EQ(EmpiricalTail({1, 2}).weak_lp_norm(1.0), 1.0);
    EXPECT_EQ(EmpiricalTail(std::vector<double>{}).weak_lp_norm(1.5), 0.0);
    EXPECT_EQ(EmpiricalTail({0, 0}).weak_lp_norm(1.5), 0.0);
}

TEST(Tails, WeakNormMatchesBruteForceAndMarkov) {
    const Stream s(5);
    for (std::uint64_t c = 0; c < 50; ++c) {
        std::vector<double> y(1 + c * 7);
        for (std::size_t i = 0; i < y.size(); ++i) y[i] = std::floor(10 * s.uniform(c * 4096 + i)) / 3.0;
        const EmpiricalTail t(y);
        for (double p : {0.5, 1.0, 1.5, 2.0}) {
            EXPECT_EQ(t.weak_lp_norm(p), oracle::weak_lp_bruteforce(y, p));
            EXPECT_LE(t.weak_lp_norm(p), t.mean_power(p) * (1 + 1e-14));
        }
    }
}

TEST(Tails, Quantile) {
    const EmpiricalTail t({5, 1, 4, 2, 3});
    EXPECT_EQ(t.quantile(0.2), 1.0);
    EXPECT_EQ(t.quantile(0.5), 3.0);
    EXPECT_EQ(t.quantile(1.0), 5.0);
    EXPECT_THROW((void)t.quantile(0.0), std::invalid_argument);
}

TEST(Tails, CsvExport) {
    EXPECT_EQ(to_csv(EmpiricalTail({0.5, 2.0})), "value,probability\n0.5,0.5\n2,0.5\n");
}

TEST(ConditionalMoments, Examples) {
    const Kernel h = builtin_kernel("product");
    const Distribution rad = Distribution::rademacher();
    const auto one = conditional_moment_tail(h, rad, 1, 2.0);
    EXPECT_TRUE(one.exact);
    for (double v : one.tail.values()) EXPECT_DOUBLE_EQ(v, 1.0);

    const auto empty = conditional_moment_tail(h, Distribution::uniform(-1, 1), 0, 2.0);
    ASSERT_EQ(empty.tail.size(), 1u);
    EXPECT_NEAR(empty.tail.values()[0], 1.0 / 3.0, 0.02);  // (E x^2 y^2)^{1/2} = 1/3

    const Distribution d = Distribution::finite_discrete({0, 1, 3}, {0.5, 0.25, 0.25});
    const auto full = conditional_moment_tail(h, d, 3, 1.5);
    const auto norms = kernel_norm_tail(h, d, 10);
    ASSERT_EQ(full.tail.size(), norms.size());
    for (std::size_t i = 0; i < norms.size(); ++i) EXPECT_DOUBLE_EQ(full.tail.values()[i], norms.values()[i]);
}

TEST(ConditionalMoments, MonteCarloAgreesWithExact) {
    const Kernel h = expression_kernel({"x1*x2 + x2"}, 2);
    const Distribution d = Distribution::finite_discrete({-1, 0, 2}, {0.3, 0.3, 0.4});
    ConditionalMomentOptions o;
    o.outer = 2000;
    o.inner = 2000;
    o.seed = 1;
    const auto exact = conditional_moment_tail(h, d, 1, 2.0, o);
    o.path = ExpectationPath::MonteCarlo;
    const auto mc = conditional_moment_tail(h, d, 1, 2.0, o);
    EXPECT_FALSE(mc.exact);
    EXPECT_NEAR(mc.tail.mean_power(2.0), exact.tail.mean_power(2.0), 0.05 * exact.tail.mean_power(2.0));
}

TEST(ConditionalMoments, MaxOverLevelsDominatesEachLevel) {
    const Kernel h = builtin_kernel("sum");
    const Distribution d = Distribution::finite_discrete({-1, 0, 2}, {0.3, 0.3, 0.4});
    const auto hp = max_conditional_moment_tail(h, d, 2.0);
    const auto top = kernel_norm_tail(h, d, 10);
    EXPECT_GE(hp.tail.mean_power(2.0), top.mean_power(2.0) - 1e-12);
    EXPECT_GE(hp.tail.values()[0], conditional_moment_tail(h, d, 0, 2.0).tail.values()[0] - 1e-12);
}

TEST(RequiredIntegrability, Examples) {
    EXPECT_DOUBLE_EQ(required_integrability(2, 2, 0.0, 2.0, 0.5), 2.0);
    const double d = 3, alpha = 0.4, q = 7.0;
    const double gamma = q * (d / 2 - alpha) - 1;
    EXPECT_NEAR(required_integrability(3, 0, gamma, 2.0, alpha), q, 1e-12);
    EXPECT_THROW((void)required_integrability(1, 0, 0.0, 2.0, 0.5), std::domain_error);
    EXPECT_THROW((void)required_integrability(1, 0, 0.0, 2.5, 0.1), std::domain_error);
    EXPECT_THROW((void)required_integrability(0, 0, 0.0, 2.0, 0.1), std::domain_error);
    EXPECT_THROW((void)required_integrability(1, 0, -1.0, 2.0, 0.1), std::domain_error);
    EXPECT_GT(required_integrability(1, 0, 0.0, 2.0, 0.5 - 1e-9), 1e6);
}
