#include "ustat/distribution.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "ustat/parallel.hpp"

namespace ustat {

Distribution Distribution::rademacher() {
    Distribution d(Family::Rademacher, 0.0, 0.0);
    d.atoms_ = {{-1.0, 0.5}, {1.0, 0.5}};
    d.cumulative_ = {0.5, 1.0};
    return d;
}

Distribution Distribution::uniform(double a, double b) {
    if (!std::isfinite(a) || !std::isfinite(b) || !(a < b)) {
        throw std::invalid_argument("uniform distribution requires finite a < b");
    }
    return Distribution(Family::Uniform, a, b);
}

Distribution Distribution::gaussian(double mean, double sd) {
    if (!std::isfinite(mean) || !std::isfinite(sd) || !(sd > 0.0)) {
        throw std::invalid_argument("gaussian distribution requires finite mean and sd > 0");
    }
    return Distribution(Family::Gaussian, mean, sd);
}

Distribution Distribution::finite_discrete(std::vector<double> values, std::vector<double> probabilities) {
    if (values.empty() || values.size() != probabilities.size()) {
        throw std::invalid_argument("finite_discrete: values and probabilities must be non-empty and equal length");
    }
    double total = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (!std::isfinite(values[i])) throw std::invalid_argument("finite_discrete: non-finite value");
        if (!(probabilities[i] >= 0.0)) throw std::invalid_argument("finite_discrete: negative probability");
        total += probabilities[i];
    }
    if (std::fabs(total - 1.0) > 1e-12) {
        throw std::invalid_argument("finite_discrete: probabilities must sum to 1 (+-1e-12)");
    }
    Distribution d(Family::FiniteDiscrete, 0.0, 0.0);
    double acc = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        d.atoms_.push_back({values[i], probabilities[i]});
        acc += probabilities[i];
        d.cumulative_.push_back(acc);
    }
    d.cumulative_.back() = 1.0;
    return d;
}

double Distribution::mean() const noexcept {
    switch (family_) {
        case Family::Uniform: return 0.5 * (a_ + b_);
        case Family::Gaussian: return a_;
        case Family::Rademacher:
        case Family::FiniteDiscrete: {
            double m = 0.0;
            for (const auto& atom : atoms_) m += atom.value * atom.probability;
            return m;
        }
    }
    return 0.0;
}

double Distribution::variance() const noexcept {
    switch (family_) {
        case Family::Uniform: return (b_ - a_) * (b_ - a_) / 12.0;
        case Family::Gaussian: return b_ * b_;
        case Family::Rademacher:
        case Family::FiniteDiscrete: {
            const double mu = mean();
            double v = 0.0;
            for (const auto& atom : atoms_) v += (atom.value - mu) * (atom.value - mu) * atom.probability;
            return v;
        }
    }
    return 0.0;
}

double Distribution::sample(const Stream& stream, std::uint64_t draw) const noexcept {
    switch (family_) {
        case Family::Rademacher: return (stream.bits(draw) >> 63) != 0 ? 1.0 : -1.0;
        case Family::Uniform: return a_ + (b_ - a_) * stream.uniform(draw);
        case Family::Gaussian: return a_ + b_ * stream.normal(draw);
        case Family::FiniteDiscrete: {
            const double u = stream.uniform(draw);
            const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
            const auto i = static_cast<std::size_t>(
                std::min<std::ptrdiff_t>(it - cumulative_.begin(),
                                         static_cast<std::ptrdiff_t>(atoms_.size()) - 1));
            return atoms_[i].value;
        }
    }
    return 0.0;
}

std::string Distribution::describe() const {
    std::ostringstream os;
    switch (family_) {
        case Family::Rademacher: os << "rademacher"; break;
        case Family::Uniform: os << "uniform(" << a_ << ',' << b_ << ')'; break;
        case Family::Gaussian: os << "gaussian(" << a_ << ',' << b_ << ')'; break;
        case Family::FiniteDiscrete: os << "finite_discrete[" << atoms_.size() << " atoms]"; break;
    }
    return os.str();
}

std::vector<double> sample_iid(const Distribution& d, std::size_t n, const Stream& stream,
                               unsigned threads) {
    std::vector<double> out(n);
    constexpr std::size_t kBlock = 4096;
    const std::size_t blocks = (n + kBlock - 1) / kBlock;
    parallel_for(blocks, threads, [&](std::size_t b) {
        const std::size_t end = std::min(n, (b + 1) * kBlock);
        for (std::size_t i = b * kBlock; i < end; ++i) out[i] = d.sample(stream, i);
    });
    return out;
}

}  // namespace ustat
