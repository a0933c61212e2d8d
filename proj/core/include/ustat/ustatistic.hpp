#pragma once

// Complete (and weighted) U-statistics
//     U_{m,n} = sum over i in Inc^m_n of h(xi_{i_1}, ..., xi_{i_m}).
//
// Every sum is organised by the last index: the block of tuples whose last
// entry is k contributes D_k, and U_{m,n} = D_0 + ... + D_{n-1}. Blocks are
// evaluated in parallel, each summed with compensation in colex order, and
// then reduced in k order, so results do not depend on the worker count.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "ustat/distribution.hpp"
#include "ustat/hoeffding.hpp"
#include "ustat/kernel.hpp"
#include "ustat/spaces.hpp"

namespace ustat {

/// Upper limit on the number of kernel evaluations of one complete sum.
inline constexpr std::uint64_t max_enumerated_terms = 100'000'000;

struct UStatOptions {
    unsigned threads = 0;
    /// Also record max_{m<=k<=n} ||U_{m,k}||.
    bool running_max = false;
    /// Norm for running maxima; l^2 of the kernel dimension when unset.
    std::optional<BanachSpace> space;
};

struct UStatResult {
    Point value;
    std::size_t n = 0;
    std::size_t m = 0;
    /// Entry j is max_{m<=k<=m+j} ||U_{m,k}||; empty unless requested.
    std::vector<double> running_max;
};

/// D_k for k = 0..n-1 (zero for k < m-1). Throws std::length_error when
/// C(n,m) exceeds max_enumerated_terms, std::invalid_argument when the
/// sample is shorter than n.
[[nodiscard]] std::vector<Point> last_index_blocks(const Kernel& h, std::span<const double> sample,
                                                   std::size_t n, unsigned threads = 0);

/// U_{m,k} for k = 0..n from one pass (cumulative block sums).
[[nodiscard]] std::vector<Point> prefix_ustats(const Kernel& h, std::span<const double> sample, std::size_t n,
                                               unsigned threads = 0);

[[nodiscard]] UStatResult complete_ustat(const Kernel& h, std::span<const double> sample, std::size_t n,
                                         const UStatOptions& options = {});

/// max_{m<=j<=k} ||U_{m,j}|| for k = m..N, from one pass over Inc^m_N.
[[nodiscard]] std::vector<double> running_max_norms(const Kernel& h, std::span<const double> sample,
                                                    std::size_t n, const std::optional<BanachSpace>& space = {},
                                                    unsigned threads = 0);

/// U_{m,k} from scratch, one k at a time (reference for running_max_norms).
[[nodiscard]] std::vector<Point> prefix_ustats_from_scratch(const Kernel& h, std::span<const double> sample,
                                                            std::size_t n);

struct DecompositionCheck {
    Point direct;
    Point reconstructed;
    /// max coordinate |direct - reconstructed|
    double max_deviation = 0.0;
    /// sum over Inc^c_n of h^(c), for c = 0..m
    std::vector<Point> level_sums;
};

/// Compares U_{m,n} with C(n,m) sum_c C(m,c)/C(n,c) sum_{Inc^c_n} h^(c),
/// using C(n,m) C(m,c) / C(n,c) = C(n-c, m-c). Requires a symmetric kernel
/// and a finite-support law (exact projections).
[[nodiscard]] DecompositionCheck decomposition_identity_check(const Kernel& h, const Distribution& dist,
                                                              std::span<const double> sample, std::size_t n,
                                                              unsigned threads = 0);

struct ComponentSum {
    Subset positions;
    Point value;
};

/// U_n^I = sum_{i in Inc^m_n} h^I(xi_{i_I}) for every subset I of [0, m).
/// The terms sum to U_{m,n}. Works for weighted kernels.
[[nodiscard]] std::vector<ComponentSum> hoeffding_ustat_terms(const Kernel& h, const Distribution& dist,
                                                              std::span<const double> sample, std::size_t n,
                                                              const ProjectionOptions& options = {});

/// Piecewise-linear path t -> n^{-exponent} U_{m, floor(nt)} interpolated
/// between the breakpoints k/n.
class PartialSumPath {
public:
    PartialSumPath(std::vector<Point> breakpoint_values, double exponent);

    /// Number of segments (n).
    [[nodiscard]] std::size_t segments() const noexcept { return values_.size() - 1; }
    [[nodiscard]] std::size_t dimension() const noexcept { return values_.front().size(); }
    [[nodiscard]] double exponent() const noexcept { return exponent_; }
    /// Stored (scaled) value at k/n.
    [[nodiscard]] const Point& value(std::size_t k) const { return values_.at(k); }
    [[nodiscard]] const std::vector<Point>& values() const noexcept { return values_; }
    /// Path at t in [0, 1]. Exact stored value at breakpoints.
    [[nodiscard]] Point at(double t) const;

private:
    std::vector<Point> values_;
    double exponent_;
};

[[nodiscard]] PartialSumPath partial_sum_path(const Kernel& h, std::span<const double> sample, std::size_t n,
                                              double exponent, unsigned threads = 0);

}  // namespace ustat
