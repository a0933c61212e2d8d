#include "ustat/ustatistic.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "ustat/combinatorics.hpp"
#include "ustat/parallel.hpp"
#include "ustat/summation.hpp"

namespace ustat {
namespace {

void require_sample(const Kernel& h, std::span<const double> sample, std::size_t n) {
    if (sample.size() < n) {
        throw std::invalid_argument("sample has " + std::to_string(sample.size()) + " entries, need n = " +
                                    std::to_string(n));
    }
    if (h.arity() == 0) throw std::invalid_argument("kernel arity must be >= 1");
}

void require_enumerable(std::size_t n, std::size_t m) {
    const WideCount total = count_tuples_wide(n, m);
    if (total > max_enumerated_terms) {
        throw std::length_error("C(" + std::to_string(n) + "," + std::to_string(m) +
                                ") exceeds the enumeration cap of 1e8 terms; use an incomplete design");
    }
}

std::vector<Point> cumulative(const std::vector<Point>& blocks, std::size_t dim) {
    std::vector<Point> out;
    out.reserve(blocks.size() + 1);
    CompensatedVector acc(dim);
    out.push_back(acc.value());
    for (const Point& d : blocks) {
        acc.add(d);
        out.push_back(acc.value());
    }
    return out;
}

}  // namespace

std::vector<Point> last_index_blocks(const Kernel& h, std::span<const double> sample, std::size_t n,
                                     unsigned threads) {
    require_sample(h, sample, n);
    const std::size_t m = h.arity();
    require_enumerable(n, m);
    const std::size_t dim = h.dimension();
    std::vector<Point> blocks(n, Point(dim, 0.0));
    const std::size_t first = m - 1;
    if (n <= first) return blocks;

    parallel_for(n - first, threads, [&](std::size_t j) {
        const std::size_t k = first + j;
        std::vector<double> x(m);
        std::vector<std::size_t> index(m);
        Point out(dim);
        CompensatedVector acc(dim);
        x[m - 1] = sample[k];
        index[m - 1] = k;
        const std::span<const std::size_t> idx =
            h.weighted() ? std::span<const std::size_t>(index) : std::span<const std::size_t>();
        for (TupleCursor cur(k, m - 1); !cur.done(); cur.advance()) {
            const auto t = cur.current();
            for (std::size_t p = 0; p + 1 < m; ++p) {
                x[p] = sample[t[p]];
                index[p] = t[p];
            }
            h.evaluate_into(x, idx, out);
            acc.add(out);
        }
        blocks[k] = acc.value();
    });
    return blocks;
}

std::vector<Point> prefix_ustats(const Kernel& h, std::span<const double> sample, std::size_t n,
                                 unsigned threads) {
    return cumulative(last_index_blocks(h, sample, n, threads), h.dimension());
}

UStatResult complete_ustat(const Kernel& h, std::span<const double> sample, std::size_t n,
                           const UStatOptions& options) {
    require_sample(h, sample, n);
    const std::size_t m = h.arity();
    if (options.space && options.space->dimension() != h.dimension()) {
        throw std::invalid_argument("space dimension does not match the kernel dimension");
    }
    const auto blocks = last_index_blocks(h, sample, n, options.threads);
    const auto prefix = cumulative(blocks, h.dimension());

    UStatResult r;
    r.value = prefix.back();
    r.n = n;
    r.m = m;
    if (options.running_max) {
        double best = 0.0;
        for (std::size_t k = m; k <= n; ++k) {
            best = std::max(best, norm_or_euclidean(options.space, prefix[k]));
            r.running_max.push_back(best);
        }
    }
    return r;
}

std::vector<double> running_max_norms(const Kernel& h, std::span<const double> sample, std::size_t n,
                                      const std::optional<BanachSpace>& space, unsigned threads) {
    UStatOptions o;
    o.threads = threads;
    o.running_max = true;
    o.space = space;
    return complete_ustat(h, sample, n, o).running_max;
}

std::vector<Point> prefix_ustats_from_scratch(const Kernel& h, std::span<const double> sample, std::size_t n) {
    require_sample(h, sample, n);
    const std::size_t m = h.arity();
    require_enumerable(n, m);
    std::vector<Point> out;
    std::vector<double> x(m);
    Point value(h.dimension());
    for (std::size_t k = 0; k <= n; ++k) {
        CompensatedVector acc(h.dimension());
        for (TupleCursor cur(k, m); !cur.done(); cur.advance()) {
            const auto t = cur.current();
            for (std::size_t p = 0; p < m; ++p) x[p] = sample[t[p]];
            h.evaluate_into(x, h.weighted() ? t : std::span<const std::size_t>(), value);
            acc.add(value);
        }
        out.push_back(acc.value());
    }
    return out;
}

DecompositionCheck decomposition_identity_check(const Kernel& h, const Distribution& dist,
                                                std::span<const double> sample, std::size_t n, unsigned threads) {
    if (!dist.has_finite_support()) {
        throw std::invalid_argument("decomposition_identity_check needs a finite-support law");
    }
    const std::size_t m = h.arity();
    const std::size_t dim = h.dimension();
    DecompositionCheck out;
    UStatOptions uo;
    uo.threads = threads;
    out.direct = complete_ustat(h, sample, n, uo).value;

    ProjectionOptions po;
    po.path = ExpectationPath::Exact;
    CompensatedVector total(dim);
    for (std::size_t c = 0; c <= m; ++c) {
        const HoeffdingComponent hc = project_degenerate_level(h, c, dist, po);
        const std::size_t blocks = c == 0 ? 1 : (n >= c ? n - c + 1 : 0);
        std::vector<Point> partial(blocks, Point(dim, 0.0));
        // group by last index, as in the complete sum
        parallel_for(blocks, threads, [&](std::size_t j) {
            CompensatedVector acc(dim);
            std::vector<double> x(c);
            if (c == 0) {
                acc.add(hc(x));
            } else {
                const std::size_t k = c - 1 + j;
                x[c - 1] = sample[k];
                for (TupleCursor cur(k, c - 1); !cur.done(); cur.advance()) {
                    const auto t = cur.current();
                    for (std::size_t p = 0; p + 1 < c; ++p) x[p] = sample[t[p]];
                    acc.add(hc(x));
                }
            }
            partial[j] = acc.value();
        });
        CompensatedVector level(dim);
        for (const Point& p : partial) level.add(p);
        out.level_sums.push_back(level.value());
        if (n >= m) {
            const double coefficient = static_cast<double>(count_tuples_wide(n - c, m - c));
            total.add_scaled(coefficient, out.level_sums.back());
        }
    }
    out.reconstructed = total.value();
    for (std::size_t i = 0; i < dim; ++i) {
        out.max_deviation = std::max(out.max_deviation, std::fabs(out.direct[i] - out.reconstructed[i]));
    }
    return out;
}

std::vector<ComponentSum> hoeffding_ustat_terms(const Kernel& h, const Distribution& dist,
                                                std::span<const double> sample, std::size_t n,
                                                const ProjectionOptions& options) {
    require_sample(h, sample, n);
    const std::size_t m = h.arity();
    if (m > 16) throw std::invalid_argument("hoeffding_ustat_terms: arity too large");
    require_enumerable(n, m);
    const std::size_t dim = h.dimension();
    const ConditionalExpectation engine(h, dist, options);
    const Subset full = full_subset(m);

    std::vector<CompensatedVector> acc(std::size_t{1} << m, CompensatedVector(dim));
    std::vector<double> x(m);
    std::vector<Estimate> memo(std::size_t{1} << m);
    for (TupleCursor cur(n, m); !cur.done(); cur.advance()) {
        const auto t = cur.current();
        for (std::size_t p = 0; p < m; ++p) x[p] = sample[t[p]];
        const std::span<const std::size_t> idx = h.weighted() ? t : std::span<const std::size_t>();
        for (Subset j = 0; j <= full; ++j) memo[j] = engine(j, x, idx);
        for (Subset i = 0; i <= full; ++i) {
            CompensatedVector term(dim);
            for (Subset j = i;; j = (j - 1) & i) {
                const double sign = ((subset_size(i) - subset_size(j)) % 2 == 0) ? 1.0 : -1.0;
                term.add_scaled(sign, memo[j].value);
                if (j == 0) break;
            }
            acc[i].add(term.value());
        }
    }
    std::vector<ComponentSum> out;
    for (Subset i = 0; i <= full; ++i) out.push_back({i, acc[i].value()});
    return out;
}

PartialSumPath::PartialSumPath(std::vector<Point> breakpoint_values, double exponent)
    : values_(std::move(breakpoint_values)), exponent_(exponent) {
    if (values_.size() < 2) throw std::invalid_argument("a partial-sum path needs n >= 1");
    for (const Point& p : values_) {
        if (p.size() != values_.front().size()) throw std::invalid_argument("inconsistent path dimension");
    }
}

Point PartialSumPath::at(double t) const {
    if (!(t >= 0.0 && t <= 1.0)) throw std::out_of_range("path time must lie in [0, 1]");
    const std::size_t n = segments();
    const double s = t * static_cast<double>(n);
    const auto k = std::min(static_cast<std::size_t>(std::floor(s)), n);
    const double frac = s - static_cast<double>(k);
    if (frac == 0.0 || k == n) return values_[k];
    Point out(dimension());
    for (std::size_t c = 0; c < out.size(); ++c) {
        out[c] = values_[k][c] + frac * (values_[k + 1][c] - values_[k][c]);
    }
    return out;
}

PartialSumPath partial_sum_path(const Kernel& h, std::span<const double> sample, std::size_t n, double exponent,
                                unsigned threads) {
    if (n == 0) throw std::invalid_argument("partial_sum_path: n must be >= 1");
    auto prefix = cumulative(last_index_blocks(h, sample, n, threads), h.dimension());
    const double scale = std::pow(static_cast<double>(n), -exponent);
    for (Point& p : prefix) {
        for (double& v : p) v *= scale;
    }
    return PartialSumPath(std::move(prefix), exponent);
}

}  // namespace ustat
