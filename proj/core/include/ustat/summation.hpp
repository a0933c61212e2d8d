#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace ustat {

/// Neumaier-compensated accumulator. Adding an exact zero leaves the state
/// untouched, so skipping empty blocks never changes a reduction.
class CompensatedSum {
public:
    void add(double x) noexcept {
        const double t = sum_ + x;
        if (std::fabs(sum_) >= std::fabs(x)) {
            comp_ += (sum_ - t) + x;
        } else {
            comp_ += (x - t) + sum_;
        }
        sum_ = t;
    }

    [[nodiscard]] double value() const noexcept { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

/// Coordinate-wise compensated accumulator for points of a fixed dimension.
class CompensatedVector {
public:
    explicit CompensatedVector(std::size_t dimension) : sums_(dimension) {}

    void add(std::span<const double> x) noexcept {
        for (std::size_t i = 0; i < sums_.size(); ++i) sums_[i].add(x[i]);
    }

    void add_scaled(double w, std::span<const double> x) noexcept {
        for (std::size_t i = 0; i < sums_.size(); ++i) sums_[i].add(w * x[i]);
    }

    [[nodiscard]] std::size_t dimension() const noexcept { return sums_.size(); }

    [[nodiscard]] std::vector<double> value() const {
        std::vector<double> out(sums_.size());
        for (std::size_t i = 0; i < sums_.size(); ++i) out[i] = sums_[i].value();
        return out;
    }

private:
    std::vector<CompensatedSum> sums_;
};

}  // namespace ustat
