#include <gtest/gtest.h>

#include <cmath>
#include <set>
#include <stdexcept>

#include "ustat/distribution.hpp"
#include "ustat/random.hpp"
#include "ustat/spaces.hpp"

using namespace ustat;

TEST(Spaces, NormExamples) {
    EXPECT_DOUBLE_EQ(BanachSpace(2, 2.0).norm(std::vector<double>{3, 4}), 5.0);
    EXPECT_EQ(BanachSpace(3, 1.5).norm(std::vector<double>{0, 0, 0}), 0.0);
    EXPECT_NEAR(BanachSpace(3, 1.5).norm(std::vector<double>{1, 1, 1}), std::cbrt(9.0), 1e-14);
    EXPECT_THROW((void)BanachSpace(2, 2.0).norm(std::vector<double>{1, 2, 3}), std::invalid_argument);
}

TEST(Spaces, AdmissibleRange) {
    EXPECT_EQ(BanachSpace(1, 2.0).admissible_p_range().upper, 2.0);
    EXPECT_EQ(BanachSpace(1, 1.5).admissible_p_range().upper, 1.5);
    EXPECT_EQ(BanachSpace(1, 3.0).admissible_p_range().upper, 2.0);
    EXPECT_FALSE(BanachSpace(1, 2.0).admissible_p_range().contains(1.0));
    EXPECT_TRUE(BanachSpace(1, 2.0).admissible_p_range().contains(2.0));
    EXPECT_THROW(BanachSpace(1, 1.0), std::invalid_argument);
    EXPECT_THROW(BanachSpace(0, 2.0), std::invalid_argument);
}

TEST(Spaces, TriangleInequalityAndHomogeneity) {
    const Stream s(7);
    for (double exponent : {1.2, 1.5, 2.0, 3.0}) {
        const BanachSpace space(4, exponent);
        for (std::uint64_t trial = 0; trial < 10000; ++trial) {
            std::vector<double> x(4), y(4), xy(4), cx(4);
            const double c = 4.0 * s.uniform(trial * 9 + 8) - 2.0;
            for (std::size_t k = 0; k < 4; ++k) {
                x[k] = s.normal(trial * 9 + k);
                y[k] = s.normal(trial * 9 + 4 + k);
                xy[k] = x[k] + y[k];
                cx[k] = c * x[k];
            }
            ASSERT_LE(space.norm(xy), space.norm(x) + space.norm(y) + 1e-12);
            ASSERT_NEAR(space.norm(cx), std::fabs(c) * space.norm(x), 1e-12 * (1 + space.norm(cx)));
        }
    }
}

TEST(Random, PhiloxKnownAnswer) {
    const auto out = philox4x32({0, 0, 0, 0}, {0, 0});
    EXPECT_EQ(out[0], 0x6627e8d5u);
    EXPECT_EQ(out[1], 0xe169c58du);
    EXPECT_EQ(out[2], 0xbc57ac4cu);
    EXPECT_EQ(out[3], 0x9b00dbd8u);
}

TEST(Random, PhiloxKnownAnswerAllOnes) {
    const auto out = philox4x32({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu}, {0xffffffffu, 0xffffffffu});
    EXPECT_EQ(out[0], 0x408f276du);
    EXPECT_EQ(out[1], 0x41c83b0eu);
    EXPECT_EQ(out[2], 0xa20bc7c6u);
    EXPECT_EQ(out[3], 0x6d5451fdu);
}

TEST(Random, PhiloxKnownAnswerPiDigits) {
    const auto out = philox4x32({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u}, {0xa4093822u, 0x299f31d0u});
    EXPECT_EQ(out[0], 0xd16cfe09u);
    EXPECT_EQ(out[1], 0x94fdccebu);
    EXPECT_EQ(out[2], 0x5001e420u);
    EXPECT_EQ(out[3], 0x24126ea1u);
}

TEST(Random, StreamsArePureAndDistinct) {
    const Stream a(42), b(42);
    EXPECT_EQ(a.bits(17), b.bits(17));
    std::set<std::uint64_t> seen;
    for (std::uint64_t k = 0; k < 1000; ++k) seen.insert(a.child(k).bits(0));
    EXPECT_EQ(seen.size(), 1000u);
    EXPECT_NE(Stream(1).bits(0), Stream(2).bits(0));
}

TEST(Random, UniformRangeAndBelow) {
    const Stream s(3);
    for (std::uint64_t c = 0; c < 10000; ++c) {
        const double u = s.uniform(c), v = s.uniform_open(c);
        ASSERT_GE(u, 0.0);
        ASSERT_LT(u, 1.0);
        ASSERT_GT(v, 0.0);
        ASSERT_LT(v, 1.0);
    }
    std::uint64_t counter = 0;
    for (int i = 0; i < 1000; ++i) ASSERT_LT(s.below(7, counter), 7u);
    EXPECT_GE(counter, 1000u);
}

TEST(Distribution, PointMassAndMoments) {
    const auto d = Distribution::finite_discrete({5.0}, {1.0});
    EXPECT_EQ(sample_iid(d, 3, Stream(0)), (std::vector<double>{5, 5, 5}));
    EXPECT_DOUBLE_EQ(Distribution::uniform(-1, 1).variance(), 1.0 / 3.0);
    EXPECT_DOUBLE_EQ(Distribution::rademacher().mean(), 0.0);
    EXPECT_THROW(Distribution::finite_discrete({1, 2}, {0.5, 0.6}), std::invalid_argument);
    EXPECT_THROW(Distribution::uniform(1, 1), std::invalid_argument);
    EXPECT_THROW(Distribution::gaussian(0, -1), std::invalid_argument);
}

TEST(Distribution, RademacherMeanWithinClt) {
    const auto x = sample_iid(Distribution::rademacher(), 100000, Stream(11));
    double sum = 0.0;
    for (double v : x) {
        ASSERT_TRUE(v == 1.0 || v == -1.0);
        sum += v;
    }
    EXPECT_LT(std::fabs(sum / 1e5), 0.02);
}

TEST(Distribution, SamplingIndependentOfThreads) {
    for (const auto& d : {Distribution::rademacher(), Distribution::uniform(-2, 3), Distribution::gaussian(1, 2),
                          Distribution::finite_discrete({0, 1, 4}, {0.2, 0.5, 0.3})}) {
        EXPECT_EQ(sample_iid(d, 5000, Stream(9).child(1), 1), sample_iid(d, 5000, Stream(9).child(1), 8));
        EXPECT_EQ(sample_iid(d, 100, Stream(9)), sample_iid(d, 100, Stream(9)));
    }
}

TEST(Distribution, GaussianMoments) {
    const auto x = sample_iid(Distribution::gaussian(1.0, 2.0), 200000, Stream(5));
    double s = 0.0, s2 = 0.0;
    for (double v : x) {
        s += v;
        s2 += v * v;
    }
    const double mean = s / 2e5, var = s2 / 2e5 - mean * mean;
    EXPECT_NEAR(mean, 1.0, 5 * 2.0 / std::sqrt(2e5));
    EXPECT_NEAR(var, 4.0, 0.1);
}
