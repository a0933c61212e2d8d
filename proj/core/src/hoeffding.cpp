#include "ustat/hoeffding.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <stdexcept>

#include "ustat/combinatorics.hpp"
#include "ustat/parallel.hpp"
#include "ustat/summation.hpp"

namespace ustat {
namespace {

std::uint64_t hash_fixed(Subset fixed, std::span<const double> values, std::span<const std::size_t> index) {
    std::uint64_t h = mix64(0xA5A5A5A5ULL ^ fixed);
    for (std::size_t k = 0; k < values.size(); ++k) {
        if ((fixed >> k) & 1U) {
            double v = values[k];
            if (v == 0.0) v = 0.0;  // fold -0.0 onto +0.0
            h = mix64(h ^ std::bit_cast<std::uint64_t>(v));
        }
    }
    for (std::size_t i : index) h = mix64(h ^ (0x1000003ULL + i));
    return h;
}

// number of atom combinations over `free_count` positions, saturating
std::uint64_t combinations(std::size_t atoms, std::size_t free_count) {
    std::uint64_t total = 1;
    for (std::size_t k = 0; k < free_count; ++k) {
        if (__builtin_mul_overflow(total, static_cast<std::uint64_t>(atoms), &total)) {
            return ~std::uint64_t{0};
        }
    }
    return total;
}

double squared_norm(std::span<const double> x) {
    double s = 0.0;
    for (double v : x) s += v * v;
    return s;
}

/// Enumerates atom assignments to the positions in `positions` (odometer);
/// f(weight) is called with `values` filled in.
template <typename F>
void for_each_atom_assignment(const Distribution& dist, std::span<const std::size_t> positions,
                              std::span<double> values, F&& f) {
    const auto atoms = dist.atoms();
    std::vector<std::size_t> digit(positions.size(), 0);
    for (;;) {
        double w = 1.0;
        for (std::size_t j = 0; j < positions.size(); ++j) {
            values[positions[j]] = atoms[digit[j]].value;
            w *= atoms[digit[j]].probability;
        }
        f(w);
        std::size_t j = 0;
        while (j < digit.size() && ++digit[j] == atoms.size()) {
            digit[j] = 0;
            ++j;
        }
        if (j == digit.size()) return;
    }
}

}  // namespace

Subset subset_from_positions(std::span<const std::size_t> positions, std::size_t m) {
    Subset s = 0;
    for (std::size_t p : positions) {
        if (p >= m || p >= 32) throw std::invalid_argument("subset position out of range");
        s |= Subset{1} << p;
    }
    return s;
}

std::vector<std::size_t> subset_positions(Subset s) {
    std::vector<std::size_t> out;
    for (std::size_t k = 0; s != 0; ++k, s >>= 1) {
        if (s & 1U) out.push_back(k);
    }
    return out;
}

ConditionalExpectation::ConditionalExpectation(Kernel h, Distribution dist, ProjectionOptions options)
    : h_(std::move(h)), dist_(std::move(dist)), options_(options) {
    if (h_.arity() > 31) throw std::invalid_argument("projection supports arity <= 31");
    if (options_.inner == 0) throw std::invalid_argument("projection: inner must be >= 1");
}

bool ConditionalExpectation::exact_for(Subset fixed) const noexcept {
    const std::size_t free_count = h_.arity() - subset_size(fixed);
    if (free_count == 0) return true;
    if (options_.path == ExpectationPath::MonteCarlo || !dist_.has_finite_support()) return false;
    return combinations(dist_.atoms().size(), free_count) <= options_.exact_budget;
}

Estimate ConditionalExpectation::operator()(Subset fixed, std::span<const double> values,
                                            std::span<const std::size_t> index) const {
    const std::size_t m = h_.arity();
    const std::size_t dim = h_.dimension();
    if (values.size() != m) throw std::invalid_argument("conditional expectation: values must have length m");
    if ((fixed & ~full_subset(m)) != 0) throw std::invalid_argument("conditional expectation: subset out of range");
    if (h_.weighted() && index.size() != m) {
        throw std::invalid_argument("conditional expectation: weighted kernel needs the full index tuple");
    }
    const std::span<const std::size_t> idx = h_.weighted() ? index : std::span<const std::size_t>();

    std::vector<double> v(values.begin(), values.end());
    Estimate est{Point(dim, 0.0), Point(dim, 0.0)};

    const Subset free_set = full_subset(m) & ~fixed;
    if (free_set == 0) {
        h_.evaluate_into(v, idx, est.value);
        return est;
    }
    const auto free_positions = subset_positions(free_set);
    Point out(dim);

    if (exact_for(fixed)) {
        CompensatedVector acc(dim);
        for_each_atom_assignment(dist_, free_positions, v, [&](double w) {
            h_.evaluate_into(v, idx, out);
            acc.add_scaled(w, out);
        });
        est.value = acc.value();
        return est;
    }
    if (options_.path == ExpectationPath::Exact) {
        throw std::invalid_argument("exact expectation requested but the law has no small finite support");
    }

    const Stream stream = Stream(options_.seed).child(0xC0DEULL).child(hash_fixed(fixed, values, idx));
    const std::size_t n = options_.inner;
    std::vector<double> mean(dim, 0.0), m2(dim, 0.0);
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t k : free_positions) v[k] = dist_.sample(stream, r * m + k);
        h_.evaluate_into(v, idx, out);
        // Welford
        const double count = static_cast<double>(r + 1);
        for (std::size_t c = 0; c < dim; ++c) {
            const double delta = out[c] - mean[c];
            mean[c] += delta / count;
            m2[c] += delta * (out[c] - mean[c]);
        }
    }
    for (std::size_t c = 0; c < dim; ++c) {
        if (!std::isfinite(mean[c])) {
            throw std::domain_error("conditional expectation: non-finite Monte Carlo average (kernel not integrable?)");
        }
        est.value[c] = mean[c];
        est.standard_error[c] = n > 1 ? std::sqrt(m2[c] / static_cast<double>(n - 1) / static_cast<double>(n)) : 0.0;
    }
    return est;
}

Estimate HoeffdingComponent::evaluate_with_error(std::span<const double> x,
                                                 std::span<const std::size_t> index) const {
    if (x.size() != arity_) {
        throw std::invalid_argument("Hoeffding component: expected " + std::to_string(arity_) + " arguments");
    }
    const Kernel& h = engine_->kernel();
    const std::size_t m = h.arity();
    const std::size_t dim = h.dimension();
    if (h.weighted() && index.empty()) {
        throw std::invalid_argument("Hoeffding component of a weighted kernel needs the full index tuple");
    }

    std::vector<CompensatedSum> acc(dim);
    std::vector<double> var(dim, 0.0);
    std::vector<double> values(m, 0.0);
    auto add_term = [&](double sign, const Estimate& e) {
        for (std::size_t c = 0; c < dim; ++c) {
            acc[c].add(sign * e.value[c]);
            var[c] += e.standard_error[c] * e.standard_error[c];
        }
    };

    if (kind_ == Kind::Subset) {
        const auto positions = subset_positions(subset_);
        for (std::size_t j = 0; j < positions.size(); ++j) values[positions[j]] = x[j];
        // J runs over all subsets of I, including I itself and the empty set
        const std::size_t size_i = positions.size();
        Subset j = subset_;
        for (;;) {
            const double sign = ((size_i - subset_size(j)) % 2 == 0) ? 1.0 : -1.0;
            add_term(sign, (*engine_)(j, values, index));
            if (j == 0) break;
            j = (j - 1) & subset_;
        }
    } else {
        // level c: fixed values at the first k positions for every i in Inc^k_c
        const std::size_t c = level_;
        for (std::size_t k = 0; k <= c; ++k) {
            const double sign = ((c - k) % 2 == 0) ? 1.0 : -1.0;
            const Subset fixed = full_subset(k);
            for (TupleCursor cur(c, k); !cur.done(); cur.advance()) {
                const auto t = cur.current();
                for (std::size_t p = 0; p < k; ++p) values[p] = x[t[p]];
                add_term(sign, (*engine_)(fixed, values, index));
            }
        }
    }

    Estimate out{Point(dim), Point(dim)};
    for (std::size_t c = 0; c < dim; ++c) {
        out.value[c] = acc[c].value();
        out.standard_error[c] = std::sqrt(var[c]);
    }
    return out;
}

Kernel HoeffdingComponent::as_kernel() const {
    const Kernel& h = engine_->kernel();
    if (h.weighted()) {
        throw std::logic_error("projections of weighted kernels depend on the full index; no standalone kernel");
    }
    const bool symmetric = h.symmetric();
    const std::string label = kind_ == Kind::Subset ? "h^I" : "h^(" + std::to_string(level_) + ")";
    auto self = std::make_shared<const HoeffdingComponent>(*this);
    return Kernel(h.name() + ":" + label, arity_, h.dimension(), symmetric, false,
                  [self](std::span<const double> x, std::span<const std::size_t>, std::span<double> out) {
                      const auto e = self->evaluate_with_error(x);
                      std::copy(e.value.begin(), e.value.end(), out.begin());
                  });
}

double HoeffdingComponent::mc_noise_energy(std::size_t probes, const Stream& stream) const {
    if (exact_ || probes == 0) return 0.0;
    const Distribution& dist = engine_->distribution();
    const std::size_t m = engine_->kernel().arity();
    std::vector<std::size_t> index(m);
    for (std::size_t k = 0; k < m; ++k) index[k] = k;
    const std::span<const std::size_t> idx =
        engine_->kernel().weighted() ? std::span<const std::size_t>(index) : std::span<const std::size_t>();
    CompensatedSum total;
    std::vector<double> x(arity_);
    for (std::size_t p = 0; p < probes; ++p) {
        const Stream s = stream.child(p);
        for (std::size_t k = 0; k < arity_; ++k) x[k] = dist.sample(s, k);
        total.add(squared_norm(evaluate_with_error(x, idx).standard_error));
    }
    return total.value() / static_cast<double>(probes);
}

HoeffdingComponent project_component(const Kernel& h, Subset positions, const Distribution& dist,
                                     const ProjectionOptions& options) {
    if (h.arity() > 31 || (positions & ~full_subset(h.arity())) != 0) {
        throw std::invalid_argument("project_component: subset is not contained in [0, m)");
    }
    HoeffdingComponent c;
    c.kind_ = HoeffdingComponent::Kind::Subset;
    c.subset_ = positions;
    c.arity_ = subset_size(positions);
    c.engine_ = std::make_shared<const ConditionalExpectation>(h, dist, options);
    c.exact_ = true;
    for (Subset j = positions;; j = (j - 1) & positions) {
        c.exact_ = c.exact_ && c.engine_->exact_for(j);
        if (j == 0) break;
    }
    return c;
}

HoeffdingComponent project_degenerate_level(const Kernel& h, std::size_t level, const Distribution& dist,
                                            const ProjectionOptions& options) {
    if (!h.symmetric()) throw std::invalid_argument("project_degenerate_level: kernel must be symmetric");
    if (level > h.arity()) throw std::invalid_argument("project_degenerate_level: level exceeds arity");
    HoeffdingComponent c;
    c.kind_ = HoeffdingComponent::Kind::Level;
    c.level_ = level;
    c.subset_ = full_subset(level);
    c.arity_ = level;
    c.engine_ = std::make_shared<const ConditionalExpectation>(h, dist, options);
    c.exact_ = true;
    for (std::size_t k = 0; k <= level; ++k) c.exact_ = c.exact_ && c.engine_->exact_for(full_subset(k));
    return c;
}

const char* to_string(Verdict v) noexcept {
    switch (v) {
        case Verdict::Zero: return "zero";
        case Verdict::NonZero: return "nonzero";
        case Verdict::Inconclusive: return "inconclusive";
    }
    return "?";
}

namespace {

struct EnergyEstimate {
    double energy;
    double standard_error;
};

class DegeneracyEstimator {
public:
    DegeneracyEstimator(const Kernel& h, const Distribution& dist, const DegeneracyOptions& options,
                        std::span<const std::size_t> index)
        : h_(h), dist_(dist), options_(options), m_(h.arity()), dim_(h.dimension()) {
        if (h.weighted()) {
            if (index.empty()) {
                index_.resize(m_);
                for (std::size_t k = 0; k < m_; ++k) index_[k] = k;
            } else {
                index_.assign(index.begin(), index.end());
            }
        }
        exact_ = options.path != ExpectationPath::MonteCarlo && dist.has_finite_support() &&
                 combinations(dist.atoms().size(), m_) <= options.exact_budget;
        if (options.path == ExpectationPath::Exact && !exact_) {
            throw std::invalid_argument("check_degeneracy: exact path unavailable for this law");
        }
        if (!exact_ && options.inner < 2) throw std::invalid_argument("check_degeneracy: inner must be >= 2");
        if (!exact_ && options.outer < 2) throw std::invalid_argument("check_degeneracy: outer must be >= 2");
    }

    [[nodiscard]] bool exact() const noexcept { return exact_; }

    EnergyEstimate estimate(Subset conditioning) const {
        return exact_ ? exact_energy(conditioning) : mc_energy(conditioning);
    }

    /// E||h||^2 and E||h|| (Euclidean)
    std::pair<double, double> scale() const {
        if (exact_) {
            std::vector<double> v(m_);
            Point out(dim_);
            const auto positions = subset_positions(full_subset(m_));
            CompensatedSum e2, e1;
            for_each_atom_assignment(dist_, positions, v, [&](double w) {
                h_.evaluate_into(v, idx(), out);
                const double q = squared_norm(out);
                e2.add(w * q);
                e1.add(w * std::sqrt(q));
            });
            return {e2.value(), e1.value()};
        }
        const std::size_t outer = options_.outer;
        std::vector<double> q2(outer), q1(outer);
        parallel_for(outer, options_.threads, [&](std::size_t o) {
            const Stream s = Stream(options_.seed).child(0x5CA1EULL).child(o);
            std::vector<double> v(m_);
            Point out(dim_);
            double a2 = 0.0, a1 = 0.0;
            const std::size_t inner = options_.inner;
            for (std::size_t a = 0; a < inner; ++a) {
                for (std::size_t k = 0; k < m_; ++k) v[k] = dist_.sample(s, a * m_ + k);
                h_.evaluate_into(v, idx(), out);
                const double q = squared_norm(out);
                a2 += q;
                a1 += std::sqrt(q);
            }
            q2[o] = a2 / static_cast<double>(inner);
            q1[o] = a1 / static_cast<double>(inner);
        });
        CompensatedSum e2, e1;
        for (std::size_t o = 0; o < outer; ++o) {
            e2.add(q2[o]);
            e1.add(q1[o]);
        }
        return {e2.value() / static_cast<double>(outer), e1.value() / static_cast<double>(outer)};
    }

private:
    std::span<const std::size_t> idx() const {
        return h_.weighted() ? std::span<const std::size_t>(index_) : std::span<const std::size_t>();
    }

    EnergyEstimate exact_energy(Subset conditioning) const {
        ProjectionOptions po;
        po.path = ExpectationPath::Exact;
        po.exact_budget = options_.exact_budget;
        const ConditionalExpectation engine(h_, dist_, po);
        std::vector<double> v(m_, 0.0);
        const auto positions = subset_positions(conditioning);
        CompensatedSum energy;
        for_each_atom_assignment(dist_, positions, v, [&](double w) {
            energy.add(w * squared_norm(engine(conditioning, v, idx()).value));
        });
        return {energy.value(), 0.0};
    }

    EnergyEstimate mc_energy(Subset conditioning) const {
        const std::size_t outer = options_.outer;
        const std::size_t inner = options_.inner;
        const auto fixed_positions = subset_positions(conditioning);
        const auto free_positions = subset_positions(full_subset(m_) & ~conditioning);
        std::vector<double> per_outer(outer);
        parallel_for(outer, options_.threads, [&](std::size_t o) {
            const Stream s = Stream(options_.seed).child(0xD0D0ULL + conditioning).child(o);
            std::vector<double> v(m_);
            Point out(dim_);
            for (std::size_t k : fixed_positions) v[k] = dist_.sample(s, k);
            if (free_positions.empty()) {
                h_.evaluate_into(v, idx(), out);
                per_outer[o] = squared_norm(out);
                return;
            }
            std::vector<CompensatedSum> sum(dim_);
            CompensatedSum sum_sq;
            for (std::size_t a = 0; a < inner; ++a) {
                for (std::size_t k : free_positions) v[k] = dist_.sample(s, m_ + a * m_ + k);
                h_.evaluate_into(v, idx(), out);
                for (std::size_t c = 0; c < dim_; ++c) sum[c].add(out[c]);
                sum_sq.add(squared_norm(out));
            }
            double total_sq = 0.0;
            for (std::size_t c = 0; c < dim_; ++c) {
                const double s_c = sum[c].value();
                total_sq += s_c * s_c;
            }
            const double n = static_cast<double>(inner);
            per_outer[o] = (total_sq - sum_sq.value()) / (n * (n - 1.0));
        });
        CompensatedSum mean_acc;
        for (double e : per_outer) mean_acc.add(e);
        const double mean = mean_acc.value() / static_cast<double>(outer);
        CompensatedSum var_acc;
        for (double e : per_outer) var_acc.add((e - mean) * (e - mean));
        const double var = var_acc.value() / static_cast<double>(outer - 1);
        return {mean, std::sqrt(var / static_cast<double>(outer))};
    }

    const Kernel& h_;
    const Distribution& dist_;
    const DegeneracyOptions& options_;
    std::size_t m_;
    std::size_t dim_;
    std::vector<std::size_t> index_;
    bool exact_ = false;
};

Verdict classify(const EnergyEstimate& e, double energy_scale, bool exact, const DegeneracyOptions& o) {
    if (exact) {
        // norm <= 1e-9 * scale, with rounding headroom
        return e.energy <= 1e-18 * energy_scale + 1e-300 ? Verdict::Zero : Verdict::NonZero;
    }
    const double excess = e.energy - o.noise_floor;
    if (excess <= o.zero_sigmas * e.standard_error && excess <= o.relative_floor * energy_scale) {
        return Verdict::Zero;
    }
    if (excess >= o.nonzero_sigmas * e.standard_error && excess > 0.0) return Verdict::NonZero;
    return Verdict::Inconclusive;
}

}  // namespace

DegeneracyReport check_degeneracy(const Kernel& h, const Distribution& dist, const DegeneracyOptions& options,
                                  std::span<const std::size_t> index) {
    if (options.inner == 0 || options.outer == 0) throw std::invalid_argument("check_degeneracy: inner, outer >= 1");
    if (h.arity() > 31) throw std::invalid_argument("check_degeneracy: arity <= 31");
    const DegeneracyEstimator est(h, dist, options, index);
    const std::size_t m = h.arity();

    DegeneracyReport r;
    r.arity = m;
    r.exact = est.exact();
    r.inner = options.inner;
    r.outer = options.outer;
    const auto [e2, e1] = est.scale();
    r.energy_scale = e2;
    r.scale = e1;

    auto check = [&](Subset conditioning) {
        const EnergyEstimate e = est.estimate(conditioning);
        return ConditionalMeanCheck{conditioning, e.energy, e.standard_error, std::sqrt(std::max(e.energy, 0.0)),
                                    classify(e, r.energy_scale, r.exact, options)};
    };

    bool any_nonzero = false, any_inconclusive = false;
    for (std::size_t l0 = 0; l0 < m; ++l0) {
        r.all_but_one.push_back(check(full_subset(m) & ~(Subset{1} << l0)));
        any_nonzero = any_nonzero || r.all_but_one.back().verdict == Verdict::NonZero;
        any_inconclusive = any_inconclusive || r.all_but_one.back().verdict == Verdict::Inconclusive;
    }
    if (any_nonzero) {
        r.degenerate = false;
    } else if (!any_inconclusive) {
        r.degenerate = true;
    }

    for (std::size_t k = 0; k <= m; ++k) r.levels.push_back(check(full_subset(k)));
    for (std::size_t k = 0; k <= m; ++k) {
        const Verdict v = r.levels[k].verdict;
        if (v == Verdict::Inconclusive) break;
        if (v == Verdict::NonZero) {
            r.order = k;
            break;
        }
    }
    return r;
}

ReconstructionCheck reconstruct_identity_check(const Kernel& h, const Distribution& dist, std::size_t samples,
                                               const ProjectionOptions& options) {
    const std::size_t m = h.arity();
    if (m > 20) throw std::invalid_argument("reconstruct_identity_check: arity too large for 2^m subsets");
    const std::size_t dim = h.dimension();
    const ConditionalExpectation engine(h, dist, options);
    const Subset full = full_subset(m);
    std::vector<std::size_t> index(m);
    for (std::size_t k = 0; k < m; ++k) index[k] = k;
    const std::span<const std::size_t> idx =
        h.weighted() ? std::span<const std::size_t>(index) : std::span<const std::size_t>();

    ReconstructionCheck out;
    out.exact = true;
    for (Subset j = 0; j <= full; ++j) out.exact = out.exact && engine.exact_for(j);

    std::vector<double> x(m);
    Point direct(dim);
    std::vector<Estimate> memo(std::size_t{1} << m);
    for (std::size_t s = 0; s < samples; ++s) {
        const Stream stream = Stream(options.seed).child(0x4EC0ULL).child(s);
        for (std::size_t k = 0; k < m; ++k) x[k] = dist.sample(stream, k);
        for (Subset j = 0; j <= full; ++j) memo[j] = engine(j, x, idx);

        std::vector<CompensatedSum> recon(dim);
        std::vector<double> var(dim, 0.0);
        for (Subset i = 0; i <= full; ++i) {
            for (Subset j = i;; j = (j - 1) & i) {
                const double sign = ((subset_size(i) - subset_size(j)) % 2 == 0) ? 1.0 : -1.0;
                for (std::size_t c = 0; c < dim; ++c) {
                    recon[c].add(sign * memo[j].value[c]);
                    var[c] += memo[j].standard_error[c] * memo[j].standard_error[c];
                }
                if (j == 0) break;
            }
        }
        h.evaluate_into(x, idx, direct);
        double dev2 = 0.0, se2 = 0.0;
        for (std::size_t c = 0; c < dim; ++c) {
            const double d = recon[c].value() - direct[c];
            dev2 += d * d;
            se2 += var[c];
        }
        out.max_deviation = std::max(out.max_deviation, std::sqrt(dev2));
        out.max_aggregate_se = std::max(out.max_aggregate_se, std::sqrt(se2));
    }
    return out;
}

}  // namespace ustat
