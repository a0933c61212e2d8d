#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ustat/random.hpp"

namespace ustat {

struct Atom {
    double value;
    double probability;
};

/// Real-valued law of the i.i.d. sample. Draw `d` of a stream is a pure
/// function of (stream, d).
class Distribution {
public:
    enum class Family { Rademacher, Uniform, Gaussian, FiniteDiscrete };

    static Distribution rademacher();
    static Distribution uniform(double a, double b);
    static Distribution gaussian(double mean, double sd);
    static Distribution finite_discrete(std::vector<double> values, std::vector<double> probabilities);

    [[nodiscard]] Family family() const noexcept { return family_; }
    [[nodiscard]] double mean() const noexcept;
    [[nodiscard]] double variance() const noexcept;

    [[nodiscard]] double sample(const Stream& stream, std::uint64_t draw) const noexcept;

    /// Atoms for laws with finite support (Rademacher, FiniteDiscrete);
    /// enables exact enumeration of expectations.
    [[nodiscard]] bool has_finite_support() const noexcept {
        return family_ == Family::Rademacher || family_ == Family::FiniteDiscrete;
    }
    [[nodiscard]] std::span<const Atom> atoms() const noexcept { return atoms_; }

    [[nodiscard]] std::string describe() const;

private:
    Distribution(Family f, double a, double b) : family_(f), a_(a), b_(b) {}

    Family family_;
    double a_;  // lower bound / mean
    double b_;  // upper bound / sd
    std::vector<Atom> atoms_;
    std::vector<double> cumulative_;
};

/// n draws of `d` from `stream` (draw indices 0..n-1). Identical output for
/// any worker count.
[[nodiscard]] std::vector<double> sample_iid(const Distribution& d, std::size_t n,
                                             const Stream& stream, unsigned threads = 1);

}  // namespace ustat
