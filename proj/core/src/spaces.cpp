#include "ustat/spaces.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace ustat {

BanachSpace::BanachSpace(std::size_t dimension, double norm_exponent)
    : dimension_(dimension), s_(norm_exponent) {
    if (dimension_ == 0) throw std::invalid_argument("space: dimension must be positive");
    if (!std::isfinite(s_) || s_ <= 1.0) {
        throw std::invalid_argument("space: norm_exponent must be finite and > 1 (l^1 is not r-smooth)");
    }
}

double BanachSpace::norm(std::span<const double> x) const {
    if (x.size() != dimension_) {
        throw std::invalid_argument("space: point dimension " + std::to_string(x.size()) +
                                    " does not match space dimension " +
                                    std::to_string(dimension_));
    }
    return norm_unchecked(x);
}

double BanachSpace::norm_unchecked(std::span<const double> x) const noexcept {
    if (x.size() == 1) return std::fabs(x[0]);
    if (s_ == 2.0) {
        // scaled to avoid overflow on large coordinates
        double scale = 0.0;
        for (double v : x) scale = std::fmax(scale, std::fabs(v));
        if (scale == 0.0) return 0.0;
        double acc = 0.0;
        for (double v : x) {
            const double r = v / scale;
            acc += r * r;
        }
        return scale * std::sqrt(acc);
    }
    double scale = 0.0;
    for (double v : x) scale = std::fmax(scale, std::fabs(v));
    if (scale == 0.0) return 0.0;
    double acc = 0.0;
    for (double v : x) acc += std::pow(std::fabs(v) / scale, s_);
    return scale * std::pow(acc, 1.0 / s_);
}

std::string BanachSpace::describe() const {
    std::ostringstream os;
    os << "l^" << s_ << "(R^" << dimension_ << "), r=" << smoothness();
    return os.str();
}

double norm_or_euclidean(const std::optional<BanachSpace>& space, std::span<const double> x) {
    if (space) return space->norm(x);
    double s = 0.0;
    for (double v : x) s += v * v;
    return std::sqrt(s);
}

}  // namespace ustat
