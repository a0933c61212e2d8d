#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace ustat {

using Point = std::vector<double>;

/// Exponents p with lower < p <= upper (open at the bottom, closed on top).
struct ExponentRange {
    double lower;
    double upper;

    [[nodiscard]] bool contains(double p) const noexcept { return p > lower && p <= upper; }
};

/// Finite-dimensional l^s space. Such a space is r-smooth with r = min(s, 2);
/// l^1 is rejected because it is not r-smooth for any r > 1.
///
/// The martingale constant C_{p,B} of the space exists for every p in
/// (1, r] but is never given a number: the harness fits empirical
/// constants instead.
class BanachSpace {
public:
    BanachSpace(std::size_t dimension, double norm_exponent);

    static BanachSpace real_line() { return BanachSpace(1, 2.0); }

    [[nodiscard]] std::size_t dimension() const noexcept { return dimension_; }
    [[nodiscard]] double norm_exponent() const noexcept { return s_; }
    [[nodiscard]] double smoothness() const noexcept { return s_ < 2.0 ? s_ : 2.0; }

    /// (sum |x_k|^s)^(1/s); throws std::invalid_argument on dimension mismatch.
    [[nodiscard]] double norm(std::span<const double> x) const;
    /// Same without the dimension check, for inner loops.
    [[nodiscard]] double norm_unchecked(std::span<const double> x) const noexcept;

    /// (1, r]: the exponents p for which the deviation and moment bounds apply.
    [[nodiscard]] ExponentRange admissible_p_range() const noexcept { return {1.0, smoothness()}; }

    [[nodiscard]] std::string describe() const;

    friend bool operator==(const BanachSpace&, const BanachSpace&) = default;

private:
    std::size_t dimension_;
    double s_;
};

/// ||x|| in `space`, or the Euclidean norm when unset.
[[nodiscard]] double norm_or_euclidean(const std::optional<BanachSpace>& space, std::span<const double> x);

}  // namespace ustat
