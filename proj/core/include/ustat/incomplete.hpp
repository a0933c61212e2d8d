#pragma once

// Incomplete U-statistics: sums of a_i h(xi_i) over a random weight set
// drawn from one of three subsampling designs.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ustat/combinatorics.hpp"
#include "ustat/distribution.hpp"
#include "ustat/kernel.hpp"
#include "ustat/random.hpp"
#include "ustat/spaces.hpp"

namespace ustat {

class SamplingDesign {
public:
    enum class Variant { WithoutReplacement, WithReplacement, Bernoulli };

    static SamplingDesign without_replacement(std::uint64_t draws) { return {Variant::WithoutReplacement, draws, 0.0}; }
    static SamplingDesign with_replacement(std::uint64_t draws) { return {Variant::WithReplacement, draws, 0.0}; }
    /// Throws std::invalid_argument unless 0 <= p <= 1.
    static SamplingDesign bernoulli(double p);

    [[nodiscard]] Variant variant() const noexcept { return variant_; }
    [[nodiscard]] std::uint64_t draws() const noexcept { return draws_; }
    [[nodiscard]] double probability() const noexcept { return p_; }
    [[nodiscard]] std::string describe() const;

private:
    SamplingDesign(Variant v, std::uint64_t draws, double p) : variant_(v), draws_(draws), p_(p) {}

    Variant variant_;
    std::uint64_t draws_;
    double p_;
};

[[nodiscard]] const char* to_string(SamplingDesign::Variant v) noexcept;

/// Sparse weights over Inc^m_n keyed by colex rank, sorted by rank, all
/// weights >= 1.
class WeightSet {
public:
    using Entry = std::pair<Rank, std::uint64_t>;

    WeightSet(std::size_t n, std::size_t m, std::vector<Entry> entries);

    [[nodiscard]] std::size_t n() const noexcept { return n_; }
    [[nodiscard]] std::size_t m() const noexcept { return m_; }
    [[nodiscard]] std::size_t size() const noexcept { return entries_.size(); }
    [[nodiscard]] bool empty() const noexcept { return entries_.empty(); }
    [[nodiscard]] std::span<const Entry> entries() const noexcept { return entries_; }
    [[nodiscard]] std::uint64_t total_weight() const noexcept;
    /// Weight of the tuple with the given rank (0 when absent).
    [[nodiscard]] std::uint64_t weight_of(Rank rank) const noexcept;

private:
    std::size_t n_;
    std::size_t m_;
    std::vector<Entry> entries_;
};

/// Throws std::invalid_argument when a without-replacement design asks for
/// more than C(n,m) tuples, std::overflow_error when C(n,m) does not fit in
/// 64 bits. Bernoulli designs walk the tuples by geometric skips, so the cost
/// is proportional to the number selected.
[[nodiscard]] WeightSet draw_design(const SamplingDesign& design, std::size_t n, std::size_t m,
                                    const Stream& stream);

/// sum a_i h(xi_i). Grouped by last index exactly like complete_ustat, so the
/// all-ones weight set reproduces it bit for bit.
[[nodiscard]] Point incomplete_ustat(const Kernel& h, std::span<const double> sample, const WeightSet& weights,
                                     unsigned threads = 0);

/// |A|^{q/p}|B|^q y^q + |A|^{q/p}|B|^{q/p} y^{q/p} + |A||B| y
[[nodiscard]] double bernoulli_sum_bound_shape(std::size_t a, std::size_t b, double y, double p, double q);

struct BernoulliSumMoment {
    double estimate = 0.0;  // Monte Carlo E[Y^{q/p}]
    double standard_error = 0.0;
    double bound_shape = 0.0;
    double ratio = 0.0;  // estimate / bound_shape (0 when the shape is 0)
};

/// Y = sum_{a in A} (sum_{b in B} Y_{a,b})^p with i.i.d. Bernoulli(y) Y_{a,b}.
/// Throws std::invalid_argument unless q >= p > 1 and y in [0, 1].
[[nodiscard]] BernoulliSumMoment bernoulli_sum_moment_check(std::size_t a, std::size_t b, double y, double p,
                                                            double q, std::size_t replications,
                                                            std::uint64_t seed, unsigned threads = 0);

/// n^{q(m-d)+dq/p} p_n^q + n^{mq/p} p_n^{q/p} + n^m p_n
[[nodiscard]] double incomplete_bound_shape(std::size_t n, std::size_t m, std::size_t d, double p_n, double q,
                                            double p);

struct IncompleteMomentRow {
    std::size_t n = 0;
    double p_n = 0.0;
    double moment_estimate = 0.0;  // mean of ||U^inc||^q
    double standard_error = 0.0;
    double bound_shape = 0.0;      // incomplete_bound_shape * E||h||^q
    double ratio = 0.0;
};

struct IncompleteMomentOptions {
    std::size_t degeneracy_order = 0;  // d; the kernel arity when 0
    double q = 2.0;
    double p = 2.0;
    std::size_t replications = 1000;
    std::uint64_t seed = 0;
    unsigned threads = 0;
    /// Draws used for E||h||^q when the law has no small finite support.
    std::size_t kernel_moment_draws = 100000;
    /// l^2 of the kernel dimension when unset.
    std::optional<BanachSpace> space;
};

/// Bernoulli-design moments over a grid of (n, p_n).
[[nodiscard]] std::vector<IncompleteMomentRow> incomplete_moment_experiment(
    const Kernel& h, const Distribution& dist, std::span<const std::pair<std::size_t, double>> grid,
    const IncompleteMomentOptions& options);

/// E||h(xi_1..xi_m)||^power: exact for finite-support laws with at most
/// 2^22 atom combinations, otherwise a Monte Carlo mean over `draws`.
[[nodiscard]] double kernel_norm_moment(const Kernel& h, const Distribution& dist, double power,
                                        std::size_t draws, const Stream& stream,
                                        const std::optional<BanachSpace>& space = {});

}  // namespace ustat
