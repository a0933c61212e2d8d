#include "ustat/incomplete.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

#include "ustat/parallel.hpp"
#include "ustat/summation.hpp"

namespace ustat {

SamplingDesign SamplingDesign::bernoulli(double p) {
    if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("Bernoulli design probability must lie in [0, 1]");
    return {Variant::Bernoulli, 0, p};
}

const char* to_string(SamplingDesign::Variant v) noexcept {
    switch (v) {
        case SamplingDesign::Variant::WithoutReplacement: return "without-replacement";
        case SamplingDesign::Variant::WithReplacement: return "with-replacement";
        case SamplingDesign::Variant::Bernoulli: return "bernoulli";
    }
    return "?";
}

std::string SamplingDesign::describe() const {
    std::ostringstream os;
    os << to_string(variant_);
    if (variant_ == Variant::Bernoulli) {
        os << "(p=" << p_ << ")";
    } else {
        os << "(N=" << draws_ << ")";
    }
    return os.str();
}

WeightSet::WeightSet(std::size_t n, std::size_t m, std::vector<Entry> entries)
    : n_(n), m_(m), entries_(std::move(entries)) {
    const std::uint64_t total = count_tuples(n, m);
    for (std::size_t i = 0; i < entries_.size(); ++i) {
        if (entries_[i].first >= total) throw std::out_of_range("weight set rank outside Inc^m_n");
        if (entries_[i].second == 0) throw std::invalid_argument("weight set entries must be positive");
        if (i > 0 && entries_[i - 1].first >= entries_[i].first) {
            throw std::invalid_argument("weight set ranks must be strictly increasing");
        }
    }
}

std::uint64_t WeightSet::total_weight() const noexcept {
    std::uint64_t total = 0;
    for (const auto& e : entries_) total += e.second;
    return total;
}

std::uint64_t WeightSet::weight_of(Rank rank) const noexcept {
    const auto it = std::lower_bound(entries_.begin(), entries_.end(), rank,
                                     [](const Entry& e, Rank r) { return e.first < r; });
    return it != entries_.end() && it->first == rank ? it->second : 0;
}

WeightSet draw_design(const SamplingDesign& design, std::size_t n, std::size_t m, const Stream& stream) {
    const std::uint64_t total = count_tuples(n, m);
    std::vector<WeightSet::Entry> entries;
    std::uint64_t counter = 0;

    switch (design.variant()) {
        case SamplingDesign::Variant::WithoutReplacement: {
            const std::uint64_t draws = design.draws();
            if (draws > total) {
                throw std::invalid_argument("without-replacement design draws " + std::to_string(draws) +
                                            " tuples but C(n,m) = " + std::to_string(total));
            }
            // Floyd's algorithm: a uniform draws-subset of [0, total)
            std::unordered_set<Rank> chosen;
            chosen.reserve(draws);
            std::vector<Rank> ranks;
            ranks.reserve(draws);
            for (std::uint64_t j = total - draws; j < total; ++j) {
                const Rank t = stream.below(j + 1, counter);
                const Rank pick = chosen.insert(t).second ? t : j;
                if (pick == j) chosen.insert(j);
                ranks.push_back(pick);
            }
            std::sort(ranks.begin(), ranks.end());
            for (Rank r : ranks) entries.emplace_back(r, 1);
            break;
        }
        case SamplingDesign::Variant::WithReplacement: {
            if (design.draws() > 0 && total == 0) {
                throw std::invalid_argument("with-replacement design on an empty Inc^m_n");
            }
            std::vector<Rank> ranks(design.draws());
            for (Rank& r : ranks) r = stream.below(total, counter);
            std::sort(ranks.begin(), ranks.end());
            for (Rank r : ranks) {
                if (!entries.empty() && entries.back().first == r) {
                    ++entries.back().second;
                } else {
                    entries.emplace_back(r, 1);
                }
            }
            break;
        }
        case SamplingDesign::Variant::Bernoulli: {
            const double p = design.probability();
            if (p == 0.0 || total == 0) break;
            if (p == 1.0) {
                entries.reserve(total);
                for (Rank r = 0; r < total; ++r) entries.emplace_back(r, 1);
                break;
            }
            // gaps between selected ranks are i.i.d. Geometric(p)
            const double log_q = std::log1p(-p);
            double next = -1.0;
            for (;;) {
                const double skip = std::floor(std::log(stream.uniform_open(counter++)) / log_q);
                next += skip + 1.0;
                if (next >= static_cast<double>(total)) break;
                entries.emplace_back(static_cast<Rank>(next), 1);
            }
            break;
        }
    }
    return WeightSet(n, m, std::move(entries));
}

Point incomplete_ustat(const Kernel& h, std::span<const double> sample, const WeightSet& weights,
                       unsigned threads) {
    const std::size_t n = weights.n();
    const std::size_t m = weights.m();
    if (m != h.arity()) throw std::invalid_argument("weight set order does not match the kernel arity");
    if (sample.size() < n) throw std::out_of_range("weight set indexes beyond the sample");
    const std::size_t dim = h.dimension();
    const auto entries = weights.entries();

    // contiguous runs sharing the last index
    std::vector<std::size_t> starts;
    std::size_t current = std::numeric_limits<std::size_t>::max();
    for (std::size_t i = 0; i < entries.size(); ++i) {
        const std::size_t k = last_index_of_rank(entries[i].first, n, m);
        if (k != current) {
            starts.push_back(i);
            current = k;
        }
    }
    starts.push_back(entries.size());

    const std::size_t groups = starts.size() - 1;
    std::vector<Point> partial(groups);
    parallel_for(groups, threads, [&](std::size_t g) {
        CompensatedVector acc(dim);
        std::vector<std::size_t> t(m);
        std::vector<double> x(m);
        Point out(dim);
        for (std::size_t i = starts[g]; i < starts[g + 1]; ++i) {
            unrank_into(entries[i].first, n, m, t);
            for (std::size_t p = 0; p < m; ++p) x[p] = sample[t[p]];
            h.evaluate_into(x, h.weighted() ? std::span<const std::size_t>(t) : std::span<const std::size_t>(),
                            out);
            acc.add_scaled(static_cast<double>(entries[i].second), out);
        }
        partial[g] = acc.value();
    });
    CompensatedVector total(dim);
    for (const Point& p : partial) total.add(p);
    return total.value();
}

double bernoulli_sum_bound_shape(std::size_t a, std::size_t b, double y, double p, double q) {
    const double na = static_cast<double>(a);
    const double nb = static_cast<double>(b);
    return std::pow(na, q / p) * std::pow(nb, q) * std::pow(y, q) +
           std::pow(na, q / p) * std::pow(nb, q / p) * std::pow(y, q / p) + na * nb * y;
}

BernoulliSumMoment bernoulli_sum_moment_check(std::size_t a, std::size_t b, double y, double p, double q,
                                              std::size_t replications, std::uint64_t seed, unsigned threads) {
    if (!(p > 1.0) || !(q >= p)) throw std::invalid_argument("bernoulli_sum_moment_check needs q >= p > 1");
    if (!(y >= 0.0 && y <= 1.0)) throw std::invalid_argument("bernoulli_sum_moment_check needs y in [0, 1]");
    if (replications == 0) throw std::invalid_argument("bernoulli_sum_moment_check needs replications >= 1");

    std::vector<double> draws(replications);
    const Stream root = Stream(seed).child(0xB5ULL);
    parallel_for(replications, threads, [&](std::size_t r) {
        const Stream s = root.child(r);
        std::uint64_t counter = 0;
        double total = 0.0;
        for (std::size_t i = 0; i < a; ++i) {
            std::size_t hits = 0;
            for (std::size_t j = 0; j < b; ++j) hits += s.uniform(counter++) < y ? 1 : 0;
            total += std::pow(static_cast<double>(hits), p);
        }
        draws[r] = std::pow(total, q / p);
    });

    CompensatedSum sum;
    for (double v : draws) sum.add(v);
    BernoulliSumMoment out;
    out.estimate = sum.value() / static_cast<double>(replications);
    if (replications > 1) {
        CompensatedSum var;
        for (double v : draws) var.add((v - out.estimate) * (v - out.estimate));
        out.standard_error = std::sqrt(var.value() / static_cast<double>(replications - 1) /
                                       static_cast<double>(replications));
    }
    out.bound_shape = bernoulli_sum_bound_shape(a, b, y, p, q);
    out.ratio = out.bound_shape > 0.0 ? out.estimate / out.bound_shape : 0.0;
    return out;
}

double incomplete_bound_shape(std::size_t n, std::size_t m, std::size_t d, double p_n, double q, double p) {
    const double nn = static_cast<double>(n);
    const double md = static_cast<double>(m);
    const double dd = static_cast<double>(d);
    return std::pow(nn, q * (md - dd) + dd * q / p) * std::pow(p_n, q) +
           std::pow(nn, md * q / p) * std::pow(p_n, q / p) + std::pow(nn, md) * p_n;
}

double kernel_norm_moment(const Kernel& h, const Distribution& dist, double power, std::size_t draws,
                          const Stream& stream, const std::optional<BanachSpace>& space) {
    const std::size_t m = h.arity();
    std::vector<std::size_t> index(m);
    for (std::size_t k = 0; k < m; ++k) index[k] = k;
    const std::span<const std::size_t> idx =
        h.weighted() ? std::span<const std::size_t>(index) : std::span<const std::size_t>();
    std::vector<double> x(m);
    Point out(h.dimension());

    if (dist.has_finite_support()) {
        const auto atoms = dist.atoms();
        double combos = std::pow(static_cast<double>(atoms.size()), static_cast<double>(m));
        if (combos <= static_cast<double>(std::uint64_t{1} << 22)) {
            std::vector<std::size_t> digit(m, 0);
            CompensatedSum acc;
            for (;;) {
                double w = 1.0;
                for (std::size_t k = 0; k < m; ++k) {
                    x[k] = atoms[digit[k]].value;
                    w *= atoms[digit[k]].probability;
                }
                h.evaluate_into(x, idx, out);
                acc.add(w * std::pow(norm_or_euclidean(space, out), power));
                std::size_t j = 0;
                while (j < m && ++digit[j] == atoms.size()) digit[j++] = 0;
                if (j == m) break;
            }
            return acc.value();
        }
    }
    if (draws == 0) throw std::invalid_argument("kernel_norm_moment needs draws >= 1");
    CompensatedSum acc;
    for (std::size_t r = 0; r < draws; ++r) {
        for (std::size_t k = 0; k < m; ++k) x[k] = dist.sample(stream, r * m + k);
        h.evaluate_into(x, idx, out);
        acc.add(std::pow(norm_or_euclidean(space, out), power));
    }
    return acc.value() / static_cast<double>(draws);
}

std::vector<IncompleteMomentRow> incomplete_moment_experiment(const Kernel& h, const Distribution& dist,
                                                              std::span<const std::pair<std::size_t, double>> grid,
                                                              const IncompleteMomentOptions& options) {
    if (options.replications < 2) throw std::invalid_argument("incomplete moment experiment needs replications >= 2");
    const std::size_t m = h.arity();
    const std::size_t d = options.degeneracy_order == 0 ? m : options.degeneracy_order;
    if (d > m) throw std::invalid_argument("degeneracy order exceeds the kernel arity");
    const Stream root(options.seed);
    const double kernel_moment =
        kernel_norm_moment(h, dist, options.q, options.kernel_moment_draws, root.child(0x4D4FULL), options.space);

    std::vector<IncompleteMomentRow> rows;
    for (std::size_t g = 0; g < grid.size(); ++g) {
        const auto [n, p_n] = grid[g];
        const SamplingDesign design = SamplingDesign::bernoulli(p_n);
        const Stream cell = root.child(g);
        std::vector<double> values(options.replications);
        // replications outermost: each one draws its own sample and design
        parallel_for(options.replications, options.threads, [&](std::size_t r) {
            const Stream rep = cell.child(r);
            const auto sample = sample_iid(dist, n, rep.child(0), 1);
            const WeightSet w = draw_design(design, n, m, rep.child(1));
            const Point u = incomplete_ustat(h, sample, w, 1);
            values[r] = std::pow(norm_or_euclidean(options.space, u), options.q);
        });
        CompensatedSum sum;
        for (double v : values) sum.add(v);
        IncompleteMomentRow row;
        row.n = n;
        row.p_n = p_n;
        row.moment_estimate = sum.value() / static_cast<double>(values.size());
        CompensatedSum var;
        for (double v : values) var.add((v - row.moment_estimate) * (v - row.moment_estimate));
        row.standard_error = std::sqrt(var.value() / static_cast<double>(values.size() - 1) /
                                       static_cast<double>(values.size()));
        row.bound_shape = incomplete_bound_shape(n, m, d, p_n, options.q, options.p) * kernel_moment;
        row.ratio = row.bound_shape > 0.0 ? row.moment_estimate / row.bound_shape : 0.0;
        rows.push_back(row);
    }
    return rows;
}

}  // namespace ustat
