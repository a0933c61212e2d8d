#include <gtest/gtest.h>

#include <cmath>
#include <stdexcept>

#include "ustat/expression.hpp"
#include "ustat/kernel.hpp"

using namespace ustat;

namespace {
double eval1(const Kernel& h, std::vector<double> x, std::optional<IncreasingTuple> idx = std::nullopt) {
    return h.evaluate(x, idx).at(0);
}
}  // namespace

TEST(Kernel, BuiltinExamples) {
    EXPECT_EQ(eval1(builtin_kernel("product"), {3, -2}), -6.0);
    EXPECT_EQ(eval1(builtin_kernel("sum"), {1, 2}), 3.0);
    EXPECT_EQ(eval1(builtin_kernel("covariance"), {1, 4}), 4.5);
    EXPECT_EQ(eval1(builtin_kernel("sign"), {1, 4}), 1.0);
    EXPECT_EQ(eval1(builtin_kernel("sign"), {4, 1}), -1.0);
    EXPECT_EQ(eval1(builtin_kernel("zero"), {4, 1}), 0.0);
    EXPECT_EQ(eval1(builtin_kernel("centered-product", {2, 0.5}), {1.5, -0.5}), -1.0);
    EXPECT_EQ(eval1(builtin_kernel("product", {3, 0}), {1, 2, 3}), 6.0);
    EXPECT_TRUE(builtin_kernel("product").symmetric());
    EXPECT_FALSE(builtin_kernel("sign").symmetric());
}

TEST(Kernel, Errors) {
    EXPECT_THROW((void)builtin_kernel("nope"), std::invalid_argument);
    EXPECT_THROW((void)builtin_kernel("covariance", {3, 0}), std::invalid_argument);
    EXPECT_THROW((void)builtin_kernel("product").evaluate(std::vector<double>{1, 2, 3}), std::invalid_argument);
    const Kernel w = expression_kernel({"x1*x2/i2"}, 2);
    EXPECT_THROW((void)w.evaluate(std::vector<double>{1, 2}), std::invalid_argument);
}

TEST(Kernel, WeightedExpressionUsesOneBasedIndices) {
    const Kernel w = expression_kernel({"x1*x2/i2"}, 2);
    EXPECT_TRUE(w.weighted());
    EXPECT_DOUBLE_EQ(eval1(w, {2, 3}, IncreasingTuple{0, 4}), 6.0 / 5.0);
}

TEST(Kernel, VectorValuedAndCombinators) {
    const Kernel v = expression_kernel({"x1+x2", "x1*x2"}, 2, true);
    EXPECT_EQ(v.dimension(), 2u);
    EXPECT_EQ(v.evaluate(std::vector<double>{2, 3}), (Point{5, 6}));
    EXPECT_EQ(scaled(v, 2).evaluate(std::vector<double>{2, 3}), (Point{10, 12}));
    const Kernel lc = linear_combination(2, builtin_kernel("product"), -1, builtin_kernel("sum"));
    EXPECT_EQ(eval1(lc, {2, 3}), 12.0 - 5.0);
    EXPECT_THROW((void)linear_combination(1, builtin_kernel("product"), 1, builtin_kernel("product", {3, 0})),
                 std::invalid_argument);
}

TEST(Kernel, SymmetryFlagsAreHonest) {
    const Distribution d = Distribution::gaussian(0.3, 1.2);
    for (const auto& name : builtin_kernel_names()) {
        const Kernel h = builtin_kernel(name);
        if (h.symmetric()) EXPECT_TRUE(verify_symmetry(h, d, 100, Stream(1))) << name;
    }
    EXPECT_FALSE(verify_symmetry(builtin_kernel("sign"), d, 100, Stream(1)));
    EXPECT_FALSE(verify_symmetry(expression_kernel({"x1 - 2*x2"}, 2), d, 100, Stream(1)));
}

TEST(Expression, Precedence) {
    const auto e = [](const char* text, std::vector<double> x) { return Expression::parse(text, x.size()).evaluate(x); };
    EXPECT_EQ(e("1 + 2 * 3", {0}), 7.0);
    EXPECT_EQ(e("-x1^2", {3}), -9.0);
    EXPECT_EQ(e("2^3^2", {0}), 512.0);
    EXPECT_EQ(e("(1 + 2) * 3", {0}), 9.0);
    EXPECT_EQ(e("x1 - x2 - x3", {10, 3, 2}), 5.0);
    EXPECT_EQ(e("x1 / x2 / 2", {12, 3}), 2.0);
    EXPECT_EQ(e("max(x1, x2, -1) + min(x1, 4)", {1, 2}), 3.0);
    EXPECT_EQ(e("abs(x1) * sign(x1)", {-2.5}), -2.5);
    EXPECT_DOUBLE_EQ(e("exp(1)", {0}), std::exp(1.0));
    EXPECT_EQ(e("1.5e1 + .5", {0}), 15.5);
}

TEST(Expression, ParseErrorsCarryPositions) {
    EXPECT_THROW((void)Expression::parse("x3", 2), ParseError);
    EXPECT_THROW((void)Expression::parse("x1 +", 1), ParseError);
    EXPECT_THROW((void)Expression::parse("foo(x1)", 1), ParseError);
    EXPECT_THROW((void)Expression::parse("(x1", 1), ParseError);
    EXPECT_THROW((void)Expression::parse("x0", 1), ParseError);
    try {
        (void)Expression::parse("x1 $ 2", 1);
        FAIL();
    } catch (const ParseError& e) {
        EXPECT_EQ(e.position(), 3u);
    }
}
