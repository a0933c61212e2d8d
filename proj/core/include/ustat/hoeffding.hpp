#pragma once

// Hoeffding projections of a kernel with respect to the sample law.
//
// For a subset I of argument positions,
//     h^I(x_I) = sum_{J subset of I} (-1)^{|I|-|J|} E[h(V^{I,J})],
// where V^{I,J} carries x at the positions of J and fresh draws elsewhere.
// For a symmetric kernel the level-c component is
//     h^(c)(x_1..x_c) = sum_{k=0}^{c} (-1)^{c-k} sum_{i in Inc^k_c} E[h(x_i, xi_1..xi_{m-k})].
//
// Every conditional expectation is computed one of two ways:
//   exact       enumeration over the atoms of a finite-support law (oracle)
//   Monte Carlo average over `inner` fresh draws; the draws are keyed by the
//               fixed positions and a hash of the fixed values, so an
//               estimate is a deterministic function of its arguments and
//               is shared by every projection that uses it.

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "ustat/distribution.hpp"
#include "ustat/kernel.hpp"
#include "ustat/random.hpp"
#include "ustat/spaces.hpp"

namespace ustat {

/// Bit k set <=> argument position k belongs to the subset.
using Subset = std::uint32_t;

[[nodiscard]] inline Subset full_subset(std::size_t m) { return m >= 32 ? ~Subset{0} : (Subset{1} << m) - 1; }
[[nodiscard]] inline std::size_t subset_size(Subset s) { return static_cast<std::size_t>(__builtin_popcount(s)); }
[[nodiscard]] Subset subset_from_positions(std::span<const std::size_t> positions, std::size_t m);
[[nodiscard]] std::vector<std::size_t> subset_positions(Subset s);

enum class ExpectationPath { Auto, Exact, MonteCarlo };

struct ProjectionOptions {
    std::size_t inner = 1024;
    std::uint64_t seed = 0;
    ExpectationPath path = ExpectationPath::Auto;
    /// Largest number of atom combinations the exact path will enumerate.
    std::uint64_t exact_budget = std::uint64_t{1} << 22;
};

/// A value with per-coordinate Monte Carlo standard errors (zeros on the
/// exact path).
struct Estimate {
    Point value;
    Point standard_error;
};

class ConditionalExpectation {
public:
    ConditionalExpectation(Kernel h, Distribution dist, ProjectionOptions options);

    /// E[h(V)] with positions in `fixed` set to values[k] (values has length
    /// m; entries outside `fixed` are ignored). `index` is the full index
    /// tuple for weighted kernels, empty otherwise.
    [[nodiscard]] Estimate operator()(Subset fixed, std::span<const double> values,
                                      std::span<const std::size_t> index = {}) const;

    [[nodiscard]] bool exact_for(Subset fixed) const noexcept;
    [[nodiscard]] const Kernel& kernel() const noexcept { return h_; }
    [[nodiscard]] const Distribution& distribution() const noexcept { return dist_; }
    [[nodiscard]] const ProjectionOptions& options() const noexcept { return options_; }

private:
    Kernel h_;
    Distribution dist_;
    ProjectionOptions options_;
};

class HoeffdingComponent {
public:
    enum class Kind { Subset, Level };

    [[nodiscard]] Kind kind() const noexcept { return kind_; }
    /// Positions I (Kind::Subset) or the first c positions (Kind::Level).
    [[nodiscard]] Subset subset() const noexcept { return subset_; }
    [[nodiscard]] std::size_t level() const noexcept { return level_; }
    [[nodiscard]] std::size_t arity() const noexcept { return arity_; }
    /// True when no Monte Carlo error is involved.
    [[nodiscard]] bool exact() const noexcept { return exact_; }
    [[nodiscard]] std::size_t inner() const noexcept { return engine_->options().inner; }

    /// x holds the |I| (or c) arguments in position order. `index` is the
    /// full m-index for weighted kernels.
    [[nodiscard]] Estimate evaluate_with_error(std::span<const double> x,
                                               std::span<const std::size_t> index = {}) const;
    [[nodiscard]] Point operator()(std::span<const double> x,
                                   std::span<const std::size_t> index = {}) const {
        return evaluate_with_error(x, index).value;
    }

    /// The projection as a kernel of arity |I| (or c). Not available for
    /// weighted parents, whose projections depend on the full index.
    [[nodiscard]] Kernel as_kernel() const;

    /// Mean over `probes` random argument vectors of the summed squared
    /// standard errors: the expected squared-norm error of one evaluation.
    [[nodiscard]] double mc_noise_energy(std::size_t probes, const Stream& stream) const;

private:
    friend HoeffdingComponent project_component(const Kernel&, Subset, const Distribution&,
                                                const ProjectionOptions&);
    friend HoeffdingComponent project_degenerate_level(const Kernel&, std::size_t, const Distribution&,
                                                       const ProjectionOptions&);

    HoeffdingComponent() = default;

    Kind kind_ = Kind::Subset;
    Subset subset_ = 0;
    std::size_t level_ = 0;
    std::size_t arity_ = 0;
    bool exact_ = false;
    std::shared_ptr<const ConditionalExpectation> engine_;
};

/// h^I. Throws std::invalid_argument when I is not a subset of [0, m).
[[nodiscard]] HoeffdingComponent project_component(const Kernel& h, Subset positions,
                                                   const Distribution& dist,
                                                   const ProjectionOptions& options = {});

/// h^(c). Throws std::invalid_argument for non-symmetric kernels or c > m.
[[nodiscard]] HoeffdingComponent project_degenerate_level(const Kernel& h, std::size_t level,
                                                          const Distribution& dist,
                                                          const ProjectionOptions& options = {});

enum class Verdict { Zero, NonZero, Inconclusive };
[[nodiscard]] const char* to_string(Verdict v) noexcept;

/// Estimate of E || E[h | xi_K] ||_2^2 for one conditioning set K.
struct ConditionalMeanCheck {
    Subset conditioning;
    double energy;          // unbiased estimate of E||g||^2
    double standard_error;  // of `energy`
    double norm_estimate;   // sqrt(max(energy, 0))
    Verdict verdict;
};

struct DegeneracyOptions {
    std::size_t inner = 1024;
    std::size_t outer = 256;
    std::uint64_t seed = 0;
    ExpectationPath path = ExpectationPath::Auto;
    std::uint64_t exact_budget = std::uint64_t{1} << 22;
    /// Squared-norm allowance for inputs that carry their own Monte Carlo
    /// error, e.g. a projected component's mc_noise_energy().
    double noise_floor = 0.0;
    double zero_sigmas = 3.0;
    double nonzero_sigmas = 5.0;
    double relative_floor = 1e-3;
    unsigned threads = 0;
};

struct DegeneracyReport {
    std::size_t arity = 0;
    bool exact = false;
    std::size_t inner = 0;
    std::size_t outer = 0;
    double scale = 0.0;         // estimate of E||h||_2
    double energy_scale = 0.0;  // estimate of E||h||_2^2
    /// Conditioning on all positions but l0, for l0 = 0..m-1.
    std::vector<ConditionalMeanCheck> all_but_one;
    /// Conditioning on the first k positions, for k = 0..m.
    std::vector<ConditionalMeanCheck> levels;
    /// true: every all-but-one mean vanishes; false: one does not;
    /// nullopt: inconclusive.
    std::optional<bool> degenerate;
    /// Smallest k >= 1 whose level mean is non-zero while every lower level
    /// vanishes; 0 when E h != 0; nullopt when inconclusive or h = 0.
    std::optional<std::size_t> order;
};

/// Degeneracy certificate. On the Monte Carlo path each conditional mean g
/// is estimated per outer draw with the unbiased cross-product estimator
/// (||sum h_a||^2 - sum ||h_a||^2) / (inner (inner - 1)).
/// `index` is used for weighted kernels (defaults to 0..m-1).
[[nodiscard]] DegeneracyReport check_degeneracy(const Kernel& h, const Distribution& dist,
                                                const DegeneracyOptions& options = {},
                                                std::span<const std::size_t> index = {});

struct ReconstructionCheck {
    double max_deviation = 0.0;
    double max_aggregate_se = 0.0;
    bool exact = false;
};

/// max over `samples` random points of || sum_I h^I(x_I) - h(x) ||_2, all
/// projections sharing one memo of conditional expectations per point.
[[nodiscard]] ReconstructionCheck reconstruct_identity_check(const Kernel& h, const Distribution& dist,
                                                             std::size_t samples,
                                                             const ProjectionOptions& options = {});

}  // namespace ustat
