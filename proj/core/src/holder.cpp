#include "ustat/holder.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <stdexcept>
#include <string>

#include "ustat/parallel.hpp"

namespace ustat {
namespace {

std::size_t floor_log2(std::size_t n) { return static_cast<std::size_t>(std::bit_width(n)) - 1; }

double distance(const std::optional<BanachSpace>& space, std::span<const double> a, std::span<const double> b,
                std::vector<double>& scratch) {
    for (std::size_t c = 0; c < a.size(); ++c) scratch[c] = a[c] - b[c];
    return norm_or_euclidean(space, scratch);
}

std::size_t dyadic_point(std::size_t n, std::size_t k, std::size_t j) {
    // floor(n k 2^-j) without overflow for the sizes accepted here
    return static_cast<std::size_t>((static_cast<WideCount>(n) * k) >> j);
}

}  // namespace

HolderParams::HolderParams(double alpha) : alpha_(alpha) {
    if (!(alpha > 0.0 && alpha < 0.5)) throw std::invalid_argument("alpha must lie in (0, 1/2)");
}

double holder_norm(const PartialSumPath& path, double alpha, const std::optional<BanachSpace>& space,
                   unsigned threads) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("holder_norm: alpha must lie in (0, 1)");
    const std::size_t n = path.segments();
    if (n > max_holder_segments) {
        throw std::invalid_argument("holder_norm: path has " + std::to_string(n) + " segments, limit " +
                                    std::to_string(max_holder_segments));
    }
    // weight[g] = (g/n)^-alpha
    std::vector<double> weight(n + 1, 0.0);
    for (std::size_t g = 1; g <= n; ++g) {
        weight[g] = std::pow(static_cast<double>(g) / static_cast<double>(n), -alpha);
    }
    std::vector<double> row_max(n, 0.0);
    parallel_for(n, threads, [&](std::size_t s) {
        std::vector<double> scratch(path.dimension());
        double best = 0.0;
        for (std::size_t t = s + 1; t <= n; ++t) {
            best = std::max(best, distance(space, path.value(t), path.value(s), scratch) * weight[t - s]);
        }
        row_max[s] = best;
    });
    double sup = 0.0;
    for (double v : row_max) sup = std::max(sup, v);
    return norm_or_euclidean(space, path.value(0)) + sup;
}

double max_normalized_increment(const PartialSumPath& path, double alpha, double d, std::size_t min_level,
                                const std::optional<BanachSpace>& space) {
    const std::size_t n = path.segments();
    const std::size_t top = floor_log2(n);
    if (min_level > top) throw std::invalid_argument("dyadic levels: J exceeds floor(log2 n)");
    const double unscale = std::pow(static_cast<double>(n), path.exponent());
    const double norm_scale = std::pow(static_cast<double>(n), d / 2.0);
    std::vector<double> scratch(path.dimension());
    double best = 0.0;
    for (std::size_t j = min_level; j <= top; ++j) {
        const double level_weight = std::pow(2.0, alpha * static_cast<double>(j)) / norm_scale;
        for (std::size_t k = 0; k < (std::size_t{1} << j); ++k) {
            const double inc = distance(space, path.value(dyadic_point(n, k + 1, j)), path.value(dyadic_point(n, k, j)),
                                        scratch) * unscale;
            best = std::max(best, inc * level_weight);
        }
    }
    return best;
}

ExceedanceTable dyadic_increment_exceedance(std::span<const PartialSumPath> paths, double alpha, double eps,
                                            double d, std::size_t min_level,
                                            const std::optional<BanachSpace>& space) {
    if (paths.empty()) throw std::invalid_argument("dyadic_increment_exceedance needs at least one path");
    if (!(eps > 0.0)) throw std::invalid_argument("dyadic_increment_exceedance: eps must be positive");
    const std::size_t n = paths.front().segments();
    for (const auto& p : paths) {
        if (p.segments() != n) throw std::invalid_argument("dyadic_increment_exceedance: paths differ in n");
    }
    ExceedanceTable table;
    table.n = n;
    table.min_level = min_level;
    table.max_level = floor_log2(n);
    if (min_level > table.max_level) {
        throw std::invalid_argument("dyadic levels: J = " + std::to_string(min_level) + " exceeds floor(log2 n) = " +
                                    std::to_string(table.max_level));
    }
    const double norm_scale = std::pow(static_cast<double>(n), d / 2.0);
    std::vector<double> scratch(paths.front().dimension());
    std::vector<double> level_sum;
    for (std::size_t j = min_level; j <= table.max_level; ++j) {
        const double threshold = norm_scale * std::pow(2.0, -alpha * static_cast<double>(j)) * eps;
        double sum = 0.0;
        for (std::size_t k = 0; k < (std::size_t{1} << j); ++k) {
            const std::size_t lo = dyadic_point(n, k, j);
            const std::size_t hi = dyadic_point(n, k + 1, j);
            std::size_t hits = 0;
            for (const auto& p : paths) {
                const double unscale = std::pow(static_cast<double>(n), p.exponent());
                if (distance(space, p.value(hi), p.value(lo), scratch) * unscale > threshold) ++hits;
            }
            const double f = static_cast<double>(hits) / static_cast<double>(paths.size());
            table.cells.push_back({j, k, f});
            sum += f;
        }
        level_sum.push_back(sum);
    }
    table.tail_sums.assign(level_sum.size(), 0.0);
    double acc = 0.0;
    for (std::size_t i = level_sum.size(); i-- > 0;) {
        acc += level_sum[i];
        table.tail_sums[i] = acc;
    }
    return table;
}

}  // namespace ustat
