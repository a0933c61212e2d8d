#include "ustat/tails.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <stdexcept>
#include <string>

#include "ustat/parallel.hpp"
#include "ustat/summation.hpp"

namespace ustat {
namespace {

std::vector<std::size_t> identity_index(std::size_t m) {
    std::vector<std::size_t> index(m);
    std::iota(index.begin(), index.end(), std::size_t{0});
    return index;
}

bool exact_possible(const Distribution& dist, std::size_t m, const ConditionalMomentOptions& o) {
    if (o.path == ExpectationPath::MonteCarlo || !dist.has_finite_support()) return false;
    const double combos = std::pow(static_cast<double>(dist.atoms().size()), static_cast<double>(m));
    const bool ok = combos <= static_cast<double>(o.exact_budget);
    if (!ok && o.path == ExpectationPath::Exact) {
        throw std::invalid_argument("exact conditional moments exceed the enumeration budget");
    }
    return ok;
}

void require_mc_budget(const ConditionalMomentOptions& o) {
    if (o.outer < 2) throw std::invalid_argument("conditional moment tail: outer must be >= 2");
    if (o.inner < 2) throw std::invalid_argument("conditional moment tail: inner must be >= 2");
}

/// ||h||^p for every atom assignment, indexed by sum_k digit_k A^k.
std::vector<double> full_table(const Kernel& h, const Distribution& dist, double p,
                               const std::optional<BanachSpace>& space) {
    const auto atoms = dist.atoms();
    const std::size_t m = h.arity();
    const std::size_t a = atoms.size();
    std::size_t total = 1;
    for (std::size_t k = 0; k < m; ++k) total *= a;
    const auto index = identity_index(m);
    const std::span<const std::size_t> idx =
        h.weighted() ? std::span<const std::size_t>(index) : std::span<const std::size_t>();
    std::vector<double> table(total);
    std::vector<double> x(m);
    Point out(h.dimension());
    for (std::size_t code = 0; code < total; ++code) {
        std::size_t c = code;
        for (std::size_t k = 0; k < m; ++k, c /= a) x[k] = atoms[c % a].value;
        h.evaluate_into(x, idx, out);
        table[code] = std::pow(norm_or_euclidean(space, out), p);
    }
    return table;
}

}  // namespace

EmpiricalTail::EmpiricalTail(std::vector<double> values)
    : EmpiricalTail(values, std::vector<double>(values.size(), values.empty() ? 0.0 : 1.0 / static_cast<double>(values.size()))) {
    // exact counts instead of summed weights
    equal_weights_ = true;
    const double total = static_cast<double>(values_.size());
    for (std::size_t i = 0; i < values_.size(); ++i) {
        upper_mass_[i] = (i > 0 && values_[i] == values_[i - 1]) ? upper_mass_[i - 1]
                                                                 : static_cast<double>(values_.size() - i) / total;
    }
}

EmpiricalTail::EmpiricalTail(std::vector<double> values, std::vector<double> probabilities) {
    if (values.size() != probabilities.size()) {
        throw std::invalid_argument("tail: values and probabilities differ in length");
    }
    CompensatedSum mass;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (!std::isfinite(values[i]) || values[i] < 0.0) {
            throw std::invalid_argument("tail values must be finite and nonnegative");
        }
        if (!(probabilities[i] >= 0.0)) throw std::invalid_argument("tail probabilities must be nonnegative");
        mass.add(probabilities[i]);
    }
    if (!values.empty() && std::fabs(mass.value() - 1.0) > 1e-9) {
        throw std::invalid_argument("tail probabilities must sum to 1");
    }
    std::vector<std::size_t> order(values.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return values[i] < values[j]; });
    values_.reserve(values.size());
    probs_.reserve(values.size());
    for (std::size_t i : order) {
        values_.push_back(values[i]);
        probs_.push_back(probabilities[i]);
    }
    upper_mass_.assign(values_.size(), 0.0);
    CompensatedSum acc;
    for (std::size_t i = values_.size(); i-- > 0;) {
        acc.add(probs_[i]);
        upper_mass_[i] = acc.value();
    }
    // ties share the mass at or above their common value
    for (std::size_t i = 1; i < values_.size(); ++i) {
        if (values_[i] == values_[i - 1]) upper_mass_[i] = upper_mass_[i - 1];
    }
}

double EmpiricalTail::survival(double t) const noexcept {
    const auto it = std::upper_bound(values_.begin(), values_.end(), t);
    if (it == values_.end()) return 0.0;
    return upper_mass_[static_cast<std::size_t>(it - values_.begin())];
}

double EmpiricalTail::tail_integral(double t, double q) const {
    if (!(t > 0.0)) throw std::invalid_argument("tail_integral: t must be positive");
    if (!(q > 0.0)) throw std::invalid_argument("tail_integral: q must be positive");
    CompensatedSum acc;
    for (std::size_t i = 0; i < values_.size(); ++i) {
        const double u = values_[i] >= t ? 1.0 : values_[i] / t;
        acc.add(equal_weights_ ? std::pow(u, q) : probs_[i] * std::pow(u, q));
    }
    const double mean = equal_weights_ ? acc.value() / static_cast<double>(values_.size()) : acc.value();
    return mean / q;
}

double EmpiricalTail::weak_lp_norm(double p) const {
    if (!(p > 0.0)) throw std::invalid_argument("weak_lp_norm: p must be positive");
    double best = 0.0;
    for (std::size_t i = 0; i < values_.size(); ++i) {
        if (values_[i] > 0.0 && (i == 0 || values_[i] != values_[i - 1])) {
            // i is the first of its tie group, so size - i values lie at or above it
            const double mass = equal_weights_ ? static_cast<double>(values_.size() - i) : upper_mass_[i];
            const double scale = equal_weights_ ? static_cast<double>(values_.size()) : 1.0;
            best = std::max(best, std::pow(values_[i], p) * mass / scale);
        }
    }
    return best;
}

double EmpiricalTail::mean_power(double p) const {
    CompensatedSum acc;
    for (std::size_t i = 0; i < values_.size(); ++i) {
        acc.add(equal_weights_ ? std::pow(values_[i], p) : probs_[i] * std::pow(values_[i], p));
    }
    return equal_weights_ ? acc.value() / static_cast<double>(values_.size()) : acc.value();
}

double EmpiricalTail::quantile(double level) const {
    if (!(level > 0.0 && level <= 1.0)) throw std::invalid_argument("quantile level must lie in (0, 1]");
    if (values_.empty()) throw std::invalid_argument("quantile of an empty tail");
    if (equal_weights_) {
        const auto rank = static_cast<std::size_t>(std::ceil(level * static_cast<double>(values_.size())));
        return values_[std::clamp<std::size_t>(rank, 1, values_.size()) - 1];
    }
    CompensatedSum acc;
    for (std::size_t i = 0; i < values_.size(); ++i) {
        acc.add(probs_[i]);
        if (acc.value() >= level * (1.0 - 1e-12)) return values_[i];
    }
    return values_.back();
}

ConditionalMomentProfile conditional_moment_tail(const Kernel& h, const Distribution& dist, Subset conditioning,
                                                 double p, const ConditionalMomentOptions& options) {
    const std::size_t m = h.arity();
    if (m > 31 || (conditioning & ~full_subset(m)) != 0) {
        throw std::invalid_argument("conditional_moment_tail: conditioning set not contained in [0, m)");
    }
    if (!(p > 0.0)) throw std::invalid_argument("conditional_moment_tail: p must be positive");
    ConditionalMomentProfile out;
    out.conditioning = conditioning;
    out.p = p;
    const auto index = identity_index(m);
    const std::span<const std::size_t> idx =
        h.weighted() ? std::span<const std::size_t>(index) : std::span<const std::size_t>();

    if (exact_possible(dist, m, options)) {
        out.exact = true;
        const auto atoms = dist.atoms();
        const std::size_t a = atoms.size();
        const auto table = full_table(h, dist, p, options.space);
        const auto fixed = subset_positions(conditioning);
        const auto free = subset_positions(full_subset(m) & ~conditioning);
        std::size_t fixed_combos = 1, free_combos = 1;
        for (std::size_t k = 0; k < fixed.size(); ++k) fixed_combos *= a;
        for (std::size_t k = 0; k < free.size(); ++k) free_combos *= a;
        std::vector<std::size_t> stride(m, 1);
        for (std::size_t k = 1; k < m; ++k) stride[k] = stride[k - 1] * a;

        std::vector<double> values, probs;
        for (std::size_t fc = 0; fc < fixed_combos; ++fc) {
            std::size_t base = 0;
            double w = 1.0;
            std::size_t c = fc;
            for (std::size_t pos : fixed) {
                base += (c % a) * stride[pos];
                w *= atoms[c % a].probability;
                c /= a;
            }
            CompensatedSum moment;
            for (std::size_t gc = 0; gc < free_combos; ++gc) {
                std::size_t code = base;
                double v = 1.0;
                std::size_t g = gc;
                for (std::size_t pos : free) {
                    code += (g % a) * stride[pos];
                    v *= atoms[g % a].probability;
                    g /= a;
                }
                moment.add(v * table[code]);
            }
            if (w > 0.0) {
                values.push_back(std::pow(std::max(moment.value(), 0.0), 1.0 / p));
                probs.push_back(w);
            }
        }
        out.tail = EmpiricalTail(std::move(values), std::move(probs));
        return out;
    }

    require_mc_budget(options);
    const Stream root = Stream(options.seed).child(0xC3ULL).child(conditioning);
    const auto fixed = subset_positions(conditioning);
    const auto free = subset_positions(full_subset(m) & ~conditioning);

    if (fixed.empty()) {
        // one unconditional moment from all outer * inner draws
        const std::size_t draws = options.outer * options.inner;
        std::vector<double> part(options.outer);
        parallel_for(options.outer, options.threads, [&](std::size_t o) {
            const Stream s = root.child(o);
            std::vector<double> x(m);
            Point out(h.dimension());
            CompensatedSum acc;
            for (std::size_t a = 0; a < options.inner; ++a) {
                for (std::size_t k = 0; k < m; ++k) x[k] = dist.sample(s, a * m + k);
                h.evaluate_into(x, idx, out);
                acc.add(std::pow(norm_or_euclidean(options.space, out), p));
            }
            part[o] = acc.value();
        });
        CompensatedSum total;
        for (double v : part) total.add(v);
        out.tail = EmpiricalTail::point_mass(std::pow(total.value() / static_cast<double>(draws), 1.0 / p));
        return out;
    }

    std::vector<double> roots(options.outer);
    parallel_for(options.outer, options.threads, [&](std::size_t o) {
        const Stream s = root.child(o);
        std::vector<double> x(m);
        Point out(h.dimension());
        for (std::size_t k : fixed) x[k] = dist.sample(s, k);
        if (free.empty()) {
            h.evaluate_into(x, idx, out);
            roots[o] = norm_or_euclidean(options.space, out);
            return;
        }
        CompensatedSum acc;
        for (std::size_t a = 0; a < options.inner; ++a) {
            for (std::size_t k : free) x[k] = dist.sample(s, m + a * m + k);
            h.evaluate_into(x, idx, out);
            acc.add(std::pow(norm_or_euclidean(options.space, out), p));
        }
        roots[o] = std::pow(acc.value() / static_cast<double>(options.inner), 1.0 / p);
    });
    out.tail = EmpiricalTail(std::move(roots));
    return out;
}

ConditionalMomentProfile max_conditional_moment_tail(const Kernel& h, const Distribution& dist, double p,
                                                     const ConditionalMomentOptions& options) {
    const std::size_t m = h.arity();
    if (!(p > 0.0)) throw std::invalid_argument("max_conditional_moment_tail: p must be positive");
    ConditionalMomentProfile out;
    out.conditioning = full_subset(m);
    out.p = p;

    if (exact_possible(dist, m, options)) {
        out.exact = true;
        const auto atoms = dist.atoms();
        const std::size_t a = atoms.size();
        // level[k][prefix code] = E[||h||^p | first k atoms]
        std::vector<std::vector<double>> level(m + 1);
        level[m] = full_table(h, dist, p, options.space);
        std::size_t width = level[m].size();
        for (std::size_t k = m; k-- > 0;) {
            width /= a;
            level[k].assign(width, 0.0);
            for (std::size_t code = 0; code < width; ++code) {
                CompensatedSum acc;
                for (std::size_t d = 0; d < a; ++d) acc.add(atoms[d].probability * level[k + 1][code + d * width]);
                level[k][code] = acc.value();
            }
        }
        std::vector<double> values, probs;
        const std::size_t total = level[m].size();
        for (std::size_t code = 0; code < total; ++code) {
            double w = 1.0;
            std::size_t c = code;
            for (std::size_t k = 0; k < m; ++k, c /= a) w *= atoms[c % a].probability;
            if (w == 0.0) continue;
            double best = 0.0;
            std::size_t prefix_width = 1;
            for (std::size_t k = 0; k <= m; ++k) {
                best = std::max(best, level[k][code % prefix_width]);
                prefix_width *= a;
            }
            values.push_back(std::pow(std::max(best, 0.0), 1.0 / p));
            probs.push_back(w);
        }
        out.tail = EmpiricalTail(std::move(values), std::move(probs));
        return out;
    }

    require_mc_budget(options);
    const auto index = identity_index(m);
    const std::span<const std::size_t> idx =
        h.weighted() ? std::span<const std::size_t>(index) : std::span<const std::size_t>();
    const Stream root = Stream(options.seed).child(0x3A5ULL);
    std::vector<double> roots(options.outer);
    parallel_for(options.outer, options.threads, [&](std::size_t o) {
        const Stream s = root.child(o);
        std::vector<double> xi(m), x(m);
        Point out(h.dimension());
        for (std::size_t k = 0; k < m; ++k) xi[k] = dist.sample(s, k);
        h.evaluate_into(xi, idx, out);
        double best = std::pow(norm_or_euclidean(options.space, out), p);
        for (std::size_t k = 0; k < m; ++k) {
            const Stream inner = s.child(k);
            std::copy(xi.begin(), xi.end(), x.begin());
            CompensatedSum acc;
            for (std::size_t a = 0; a < options.inner; ++a) {
                for (std::size_t j = k; j < m; ++j) x[j] = dist.sample(inner, a * m + j);
                h.evaluate_into(x, idx, out);
                acc.add(std::pow(norm_or_euclidean(options.space, out), p));
            }
            best = std::max(best, acc.value() / static_cast<double>(options.inner));
        }
        roots[o] = std::pow(best, 1.0 / p);
    });
    out.tail = EmpiricalTail(std::move(roots));
    return out;
}

EmpiricalTail kernel_norm_tail(const Kernel& h, const Distribution& dist, std::size_t draws,
                               const ConditionalMomentOptions& options) {
    const std::size_t m = h.arity();
    if (exact_possible(dist, m, options)) {
        return conditional_moment_tail(h, dist, full_subset(m), 1.0, options).tail;
    }
    if (draws == 0) throw std::invalid_argument("kernel_norm_tail: draws must be >= 1");
    const auto index = identity_index(m);
    const std::span<const std::size_t> idx =
        h.weighted() ? std::span<const std::size_t>(index) : std::span<const std::size_t>();
    const Stream s = Stream(options.seed).child(0x7A11ULL);
    std::vector<double> values(draws);
    std::vector<double> x(m);
    Point out(h.dimension());
    for (std::size_t r = 0; r < draws; ++r) {
        for (std::size_t k = 0; k < m; ++k) x[k] = dist.sample(s, r * m + k);
        h.evaluate_into(x, idx, out);
        values[r] = norm_or_euclidean(options.space, out);
    }
    return EmpiricalTail(std::move(values));
}

double required_integrability(std::size_t d, std::size_t j, double gamma, double r, double alpha) {
    if (d == 0) throw std::domain_error("required_integrability: d must be >= 1");
    if (!(r > 1.0 && r <= 2.0)) throw std::domain_error("required_integrability: r must lie in (1, 2]");
    if (!(gamma > -1.0)) throw std::domain_error("required_integrability: gamma must exceed -1");
    const double dd = static_cast<double>(d);
    const double jj = static_cast<double>(j);
    if (!(alpha > 0.0 && alpha < (r - 1.0) * dd / r)) {
        throw std::domain_error("required_integrability: alpha must lie in (0, (r-1)d/r)");
    }
    const double denominator = std::max(dd, jj) * (r - 1.0) / r - alpha + jj / r;
    if (!(denominator > 0.0)) throw std::domain_error("required_integrability: nonpositive denominator");
    return (gamma + jj + 1.0) / denominator;
}

std::string to_csv(const EmpiricalTail& tail) {
    std::string out = "value,probability\n";
    char buf[96];
    for (std::size_t i = 0; i < tail.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", tail.values()[i], tail.probabilities()[i]);
        out += buf;
    }
    return out;
}

}  // namespace ustat
