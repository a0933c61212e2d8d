#pragma once

// Hoelder norms of piecewise-linear paths and the dyadic increment
// exceedance statistic.

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "ustat/spaces.hpp"
#include "ustat/ustatistic.hpp"

namespace ustat {

/// Hoelder exponent alpha in (0, 1/2) with its companion moment exponent
/// p(alpha) = 1 / (1/2 - alpha).
class HolderParams {
public:
    /// Throws std::invalid_argument unless 0 < alpha < 1/2.
    explicit HolderParams(double alpha);
    [[nodiscard]] double alpha() const noexcept { return alpha_; }
    [[nodiscard]] double moment_exponent() const noexcept { return 1.0 / (0.5 - alpha_); }

private:
    double alpha_;
};

/// Largest path length accepted by holder_norm.
inline constexpr std::size_t max_holder_segments = 8192;

/// ||x(0)|| + sup_{s<t} ||x(t) - x(s)|| / (t - s)^alpha for alpha in (0, 1).
/// For a piecewise-linear path the supremum is attained at a pair of
/// breakpoints, so the scan over breakpoint pairs is exact.
/// Throws std::invalid_argument for alpha outside (0, 1) or more than
/// max_holder_segments segments.
[[nodiscard]] double holder_norm(const PartialSumPath& path, double alpha,
                                 const std::optional<BanachSpace>& space = {}, unsigned threads = 0);

struct ExceedanceCell {
    std::size_t level = 0;     // j
    std::size_t position = 0;  // k in [0, 2^j)
    double frequency = 0.0;
};

struct ExceedanceTable {
    std::size_t n = 0;
    std::size_t min_level = 0;
    std::size_t max_level = 0;  // floor(log2 n)
    std::vector<ExceedanceCell> cells;
    /// tail_sums[i] = sum over j >= min_level + i of the frequencies in level j.
    std::vector<double> tail_sums;
};

/// Fraction of paths with ||S(floor(n(k+1)2^-j)) - S(floor(nk 2^-j))|| > n^{d/2} 2^{-alpha j} eps
/// for j in [min_level, floor(log2 n)], where S = n^{exponent} * path values
/// are the unnormalised partial sums. All paths must share n.
/// Throws std::invalid_argument when min_level > floor(log2 n).
[[nodiscard]] ExceedanceTable dyadic_increment_exceedance(std::span<const PartialSumPath> paths, double alpha,
                                                          double eps, double d, std::size_t min_level,
                                                          const std::optional<BanachSpace>& space = {});

/// max over j in [min_level, floor(log2 n)] and k of
/// ||S(floor(n(k+1)2^-j)) - S(floor(nk 2^-j))|| * 2^{alpha j} / n^{d/2}:
/// the smallest eps for which this path contributes no exceedance.
[[nodiscard]] double max_normalized_increment(const PartialSumPath& path, double alpha, double d,
                                              std::size_t min_level, const std::optional<BanachSpace>& space = {});

}  // namespace ustat
