#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ustat/combinatorics.hpp"
#include "ustat/distribution.hpp"
#include "ustat/expression.hpp"
#include "ustat/spaces.hpp"

namespace ustat {

/// m-ary map S^m -> R^dimension, optionally depending on the index tuple
/// (weighted kernel). Immutable and shareable across threads.
class Kernel {
public:
    /// Writes h(x; index) into out (size == dimension()). `index` holds the
    /// 0-based sample indices and is empty for unweighted kernels.
    using Body = std::function<void(std::span<const double> x, std::span<const std::size_t> index,
                                    std::span<double> out)>;

    Kernel(std::string name, std::size_t arity, std::size_t dimension, bool symmetric,
           bool weighted, Body body);

    [[nodiscard]] const std::string& name() const noexcept { return name_; }
    [[nodiscard]] std::size_t arity() const noexcept { return arity_; }
    [[nodiscard]] std::size_t dimension() const noexcept { return dimension_; }
    [[nodiscard]] bool symmetric() const noexcept { return symmetric_; }
    [[nodiscard]] bool weighted() const noexcept { return weighted_; }

    /// Checked evaluation. Throws std::invalid_argument on arity mismatch or
    /// a missing / out-of-order index for a weighted kernel.
    [[nodiscard]] Point evaluate(std::span<const double> x,
                                 const std::optional<IncreasingTuple>& index = std::nullopt) const;

    /// Unchecked hot path.
    void evaluate_into(std::span<const double> x, std::span<const std::size_t> index,
                       std::span<double> out) const {
        (*body_)(x, index, out);
    }

private:
    std::string name_;
    std::size_t arity_;
    std::size_t dimension_;
    bool symmetric_;
    bool weighted_;
    std::shared_ptr<const Body> body_;
};

struct BuiltinOptions {
    std::size_t arity = 2;
    double center = 0.0;  // mu for "centered-product"
};

/// Kernel zoo with hand-derivable Hoeffding decompositions:
///   product           prod x_j                 symmetric
///   sum               sum x_j                  symmetric
///   centered-product  prod (x_j - mu)          symmetric
///   covariance        (x1 - x2)^2 / 2          symmetric, arity 2
///   sign              sign(x2 - x1)            antisymmetric, arity 2
///   zero              0                        symmetric
/// Throws std::invalid_argument for unknown names or unsupported arity.
[[nodiscard]] Kernel builtin_kernel(const std::string& name, const BuiltinOptions& options = {});

[[nodiscard]] std::vector<std::string> builtin_kernel_names();

/// One expression per output coordinate. A kernel using i<k> variables is
/// weighted. `symmetric` is a claim; see verify_symmetry.
[[nodiscard]] Kernel expression_kernel(const std::vector<std::string>& expressions,
                                       std::size_t arity, bool symmetric = false);

/// h -> c h
[[nodiscard]] Kernel scaled(const Kernel& h, double c);
/// a h1 + b h2 (same arity and dimension)
[[nodiscard]] Kernel linear_combination(double a, const Kernel& h1, double b, const Kernel& h2);

/// Compares h on random argument vectors drawn from `dist` against random
/// permutations of them; true when all agree to `tolerance` (relative to
/// max(1, |h|)). Weighted kernels are checked with a fixed index tuple.
[[nodiscard]] bool verify_symmetry(const Kernel& h, const Distribution& dist, std::size_t trials,
                                   const Stream& stream, double tolerance = 1e-12);

}  // namespace ustat
