#include <gtest/gtest.h>

#include <cmath>

#include "ustat/hoeffding.hpp"

using namespace ustat;

namespace {
Distribution centered_discrete() { return Distribution::finite_discrete({-2, 1, 3}, {0.3, 0.5, 0.2}); }  // mean -0.1

ProjectionOptions mc(std::size_t inner, std::uint64_t seed = 1) {
    ProjectionOptions o;
    o.inner = inner;
    o.seed = seed;
    o.path = ExpectationPath::MonteCarlo;
    return o;
}
}  // namespace

TEST(Hoeffding, SubsetHelpers) {
    EXPECT_EQ(full_subset(3), 7u);
    EXPECT_EQ(subset_size(5), 2u);
    EXPECT_EQ(subset_from_positions(std::vector<std::size_t>{0, 2}, 3), 5u);
    EXPECT_EQ(subset_positions(6), (std::vector<std::size_t>{1, 2}));
    EXPECT_THROW((void)subset_from_positions(std::vector<std::size_t>{3}, 3), std::invalid_argument);
}

TEST(Hoeffding, TelescopingSignIdentity) {
    for (std::size_t m = 1; m <= 6; ++m) {
        const Subset full = full_subset(m);
        for (Subset j = 0; j <= full; ++j) {
            long total = 0;
            for (Subset i = 0; i <= full; ++i) {
                if ((i & j) == j) total += ((subset_size(i) - subset_size(j)) % 2 == 0) ? 1 : -1;
            }
            EXPECT_EQ(total, j == full ? 1 : 0);
        }
    }
}

TEST(Hoeffding, SumKernelLinearComponentMonteCarlo) {
    const Kernel h = builtin_kernel("sum");
    const auto c = project_component(h, 1, Distribution::uniform(-1, 1), mc(4096));
    EXPECT_FALSE(c.exact());
    for (double x : {-0.7, 0.1, 0.9}) {
        const auto e = c.evaluate_with_error(std::vector<double>{x});
        EXPECT_NEAR(e.value[0], x, 3 * e.standard_error[0] + 1e-12);
    }
}

TEST(Hoeffding, SumKernelExactComponents) {
    const Distribution d = centered_discrete();
    const double mu = d.mean();
    const Kernel h = builtin_kernel("sum");
    EXPECT_NEAR(project_component(h, 0, d)(std::vector<double>{})[0], 2 * mu, 1e-15);
    EXPECT_NEAR(project_component(h, 1, d)(std::vector<double>{3})[0], 3 - mu, 1e-15);
    EXPECT_NEAR(project_component(h, 2, d)(std::vector<double>{-2})[0], -2 - mu, 1e-15);
    EXPECT_NEAR(project_component(h, 3, d)(std::vector<double>{1, 3})[0], 0.0, 1e-15);
    EXPECT_NEAR(project_degenerate_level(h, 1, d)(std::vector<double>{3})[0], 3 - mu, 1e-15);
}

TEST(Hoeffding, ProductKernelRademacher) {
    const Kernel h = builtin_kernel("product");
    const Distribution d = Distribution::rademacher();
    const auto top = project_component(h, 3, d);
    EXPECT_TRUE(top.exact());
    EXPECT_EQ(top(std::vector<double>{0.5, -3})[0], -1.5);
    EXPECT_EQ(project_degenerate_level(h, 2, d)(std::vector<double>{2, 3})[0], 6.0);
    EXPECT_EQ(project_degenerate_level(h, 0, d)(std::vector<double>{})[0], 0.0);
    const auto empty = project_component(h, 0, d, mc(1024));
    const auto e = empty.evaluate_with_error(std::vector<double>{});
    EXPECT_LE(std::fabs(e.value[0]), 3 * e.standard_error[0] + 1e-12);
}

TEST(Hoeffding, LevelRequiresSymmetry) {
    EXPECT_THROW((void)project_degenerate_level(builtin_kernel("sign"), 1, Distribution::rademacher()),
                 std::invalid_argument);
    EXPECT_THROW((void)project_degenerate_level(builtin_kernel("sum"), 3, Distribution::rademacher()),
                 std::invalid_argument);
    EXPECT_THROW((void)project_component(builtin_kernel("sum"), 4, Distribution::rademacher()),
                 std::invalid_argument);
}

TEST(Hoeffding, ReconstructionExactAndMonteCarlo) {
    EXPECT_EQ(reconstruct_identity_check(builtin_kernel("sum"), Distribution::uniform(-1, 1), 50, mc(64))
                  .max_deviation,
              0.0);
    const auto exact =
        reconstruct_identity_check(builtin_kernel("product", {3, 0}), Distribution::rademacher(), 50);
    EXPECT_TRUE(exact.exact);
    EXPECT_LE(exact.max_deviation, 1e-10);
    const auto approx = reconstruct_identity_check(expression_kernel({"x1*x2 + x1 + x2"}, 2, true),
                                                   Distribution::uniform(-1, 1), 50, mc(512));
    EXPECT_FALSE(approx.exact);
    EXPECT_LE(approx.max_deviation, 5 * approx.max_aggregate_se + 1e-12);
}

TEST(Hoeffding, MonteCarloConvergesToExact) {
    const Kernel h = expression_kernel({"x1*x2 + x1^2 - x2"}, 2, false);
    const Distribution d = centered_discrete();
    const auto exact = project_component(h, 1, d);
    ASSERT_TRUE(exact.exact());
    auto rms_error = [&](std::size_t inner) {
        double acc = 0.0;
        int count = 0;
        for (std::uint64_t seed = 0; seed < 40; ++seed) {
            const auto c = project_component(h, 1, d, mc(inner, seed + 100));
            for (double x : {-2.0, 1.0, 3.0}) {
                const double diff = c(std::vector<double>{x})[0] - exact(std::vector<double>{x})[0];
                acc += diff * diff;
                ++count;
            }
        }
        return std::sqrt(acc / count);
    };
    const double e100 = rms_error(100), e10k = rms_error(10000);
    // ideal ratio 10; allow a factor 3
    EXPECT_GT(e100 / e10k, 10.0 / 3.0);
}

TEST(Hoeffding, DegeneracyCertificates) {
    DegeneracyOptions o;
    o.inner = 512;
    o.outer = 256;
    o.seed = 3;
    const auto product = check_degeneracy(builtin_kernel("product", {3, 0}), Distribution::rademacher(), o);
    EXPECT_TRUE(product.exact);
    ASSERT_TRUE(product.degenerate.has_value());
    EXPECT_TRUE(*product.degenerate);
    EXPECT_EQ(product.order, std::optional<std::size_t>(3));

    const auto sum = check_degeneracy(builtin_kernel("sum"), Distribution::uniform(-1, 1), o);
    EXPECT_FALSE(sum.exact);
    EXPECT_EQ(sum.degenerate, std::optional<bool>(false));
    EXPECT_EQ(sum.order, std::optional<std::size_t>(1));

    const auto uniform_product = check_degeneracy(builtin_kernel("product"), Distribution::uniform(-1, 1), o);
    EXPECT_EQ(uniform_product.degenerate, std::optional<bool>(true));
    EXPECT_EQ(uniform_product.order, std::optional<std::size_t>(2));

    const Distribution shifted = Distribution::uniform(0, 2);
    const auto centered = check_degeneracy(builtin_kernel("centered-product", {2, shifted.mean()}), shifted, o);
    EXPECT_EQ(centered.degenerate, std::optional<bool>(true));

    const auto nonzero_mean = check_degeneracy(builtin_kernel("covariance"), Distribution::rademacher(), o);
    EXPECT_EQ(nonzero_mean.order, std::optional<std::size_t>(0));

    EXPECT_FALSE(check_degeneracy(builtin_kernel("zero"), Distribution::rademacher(), o).order.has_value());
}

TEST(Hoeffding, ProjectedComponentsAreDegenerate) {
    const Kernel h = expression_kernel({"x1*x2 + x1 + x2 + x1^2*x2^2"}, 2, true);
    const Distribution d = Distribution::uniform(-1, 1);
    ProjectionOptions po = mc(256, 8);
    for (Subset i : {1u, 2u, 3u}) {
        const auto c = project_component(h, i, d, po);
        DegeneracyOptions o;
        o.inner = 64;
        o.outer = 64;
        o.seed = 9;
        o.noise_floor = c.mc_noise_energy(32, Stream(10));
        const auto rep = check_degeneracy(c.as_kernel(), d, o);
        EXPECT_EQ(rep.degenerate, std::optional<bool>(true)) << "I=" << i;
    }
}

TEST(Hoeffding, WeightedKernelHasNoStandaloneProjection) {
    const auto c = project_component(expression_kernel({"x1*x2*i1"}, 2), 1, Distribution::rademacher());
    EXPECT_THROW((void)c.as_kernel(), std::logic_error);
}
