#pragma once

// Empirical tails of nonnegative random variables and the tail functionals
// that appear on the right-hand side of the deviation bounds.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ustat/distribution.hpp"
#include "ustat/hoeffding.hpp"
#include "ustat/kernel.hpp"
#include "ustat/spaces.hpp"

namespace ustat {

/// Law of a nonnegative variable given by sorted atoms with probabilities
/// (equal weights for an empirical sample). Immutable.
class EmpiricalTail {
public:
    EmpiricalTail() = default;
    /// Equal-weight sample. Throws std::invalid_argument on negative or
    /// non-finite values.
    explicit EmpiricalTail(std::vector<double> values);
    /// Weighted atoms; probabilities must be nonnegative and sum to 1.
    EmpiricalTail(std::vector<double> values, std::vector<double> probabilities);

    static EmpiricalTail point_mass(double value) { return EmpiricalTail(std::vector<double>{value}); }

    [[nodiscard]] std::size_t size() const noexcept { return values_.size(); }
    [[nodiscard]] bool empty() const noexcept { return values_.empty(); }
    [[nodiscard]] std::span<const double> values() const noexcept { return values_; }
    [[nodiscard]] std::span<const double> probabilities() const noexcept { return probs_; }

    /// P(Y > t); right-continuous and nonincreasing.
    [[nodiscard]] double survival(double t) const noexcept;
    /// int_0^1 u^{q-1} P(Y > t u) du = E[min(1, Y/t)^q] / q.
    /// Throws std::invalid_argument unless t > 0 and q > 0.
    [[nodiscard]] double tail_integral(double t, double q) const;
    /// sup_{t>0} t^p P(Y > t), attained as t increases to an atom.
    [[nodiscard]] double weak_lp_norm(double p) const;
    /// E[Y^p]
    [[nodiscard]] double mean_power(double p) const;
    /// Smallest atom v with P(Y <= v) >= level, level in (0, 1].
    [[nodiscard]] double quantile(double level) const;

private:
    std::vector<double> values_;
    std::vector<double> probs_;
    std::vector<double> upper_mass_;  // upper_mass_[i] = P(Y >= values_[i])
    bool equal_weights_ = false;
};

/// "value,probability" rows, 17 significant digits.
[[nodiscard]] std::string to_csv(const EmpiricalTail& tail);

struct ConditionalMomentOptions {
    std::size_t outer = 512;
    std::size_t inner = 512;
    std::uint64_t seed = 0;
    unsigned threads = 0;
    std::uint64_t exact_budget = std::uint64_t{1} << 20;
    ExpectationPath path = ExpectationPath::Auto;
    /// l^2 of the kernel dimension when unset.
    std::optional<BanachSpace> space;
};

struct ConditionalMomentProfile {
    Subset conditioning = 0;
    double p = 0.0;
    bool exact = false;
    /// Law of (E[||h||^p | xi_J])^{1/p}.
    EmpiricalTail tail;
};

/// Tail of (E[||h(xi)||^p | xi_J])^{1/p} for positions J. Exact for a
/// finite-support law within budget; otherwise `outer` draws of xi_J, each
/// with `inner` fresh draws of the other positions. J empty gives a point
/// mass at (E||h||^p)^{1/p}. Weighted kernels use index 0..m-1.
[[nodiscard]] ConditionalMomentProfile conditional_moment_tail(const Kernel& h, const Distribution& dist,
                                                               Subset conditioning, double p,
                                                               const ConditionalMomentOptions& options = {});

/// Tail of max_{k=0..m} (E[||h||^p | xi_1..xi_k])^{1/p} (the k = m term is
/// ||h(xi)|| itself).
[[nodiscard]] ConditionalMomentProfile max_conditional_moment_tail(const Kernel& h, const Distribution& dist,
                                                                   double p,
                                                                   const ConditionalMomentOptions& options = {});

/// Tail of ||h(xi)|| (exact atoms or `draws` Monte Carlo draws).
[[nodiscard]] EmpiricalTail kernel_norm_tail(const Kernel& h, const Distribution& dist, std::size_t draws,
                                             const ConditionalMomentOptions& options = {});

/// (gamma + j + 1) / (max(d, j)(r - 1)/r - alpha + j/r).
/// Throws std::domain_error unless 0 < alpha < (r-1)d/r, 1 < r <= 2,
/// d >= 1, gamma > -1 and the denominator is positive.
[[nodiscard]] double required_integrability(std::size_t d, std::size_t j, double gamma, double r, double alpha);

}  // namespace ustat
