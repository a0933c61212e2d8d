#include "ustat/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>

#include "ustat/combinatorics.hpp"
#include "ustat/hoeffding.hpp"
#include "ustat/holder.hpp"
#include "ustat/incomplete.hpp"
#include "ustat/parallel.hpp"
#include "ustat/summation.hpp"
#include "ustat/tails.hpp"
#include "ustat/ustatistic.hpp"

namespace ustat {

bool InequalityReport::passed() const noexcept {
    return std::all_of(criteria.begin(), criteria.end(), [](const Criterion& c) { return c.diagnostic || c.passed; });
}

namespace {

nlohmann::json number_or_null(double x) { return std::isfinite(x) ? nlohmann::json(x) : nlohmann::json(nullptr); }

}  // namespace

nlohmann::json InequalityReport::to_json() const {
    nlohmann::json j;
    j["experiment"] = experiment;
    j["passed"] = passed();
    j["summary"] = summary;
    auto& crit = j["criteria"] = nlohmann::json::array();
    for (const auto& c : criteria) {
        crit.push_back({{"name", c.name},
                        {"value", number_or_null(c.value)},
                        {"limit", number_or_null(c.limit)},
                        {"relation", c.relation},
                        {"passed", c.passed},
                        {"diagnostic", c.diagnostic}});
    }
    auto& tabs = j["tables"] = nlohmann::json::object();
    for (const auto& t : tables) {
        nlohmann::json rows = nlohmann::json::array();
        for (const auto& r : t.rows) {
            nlohmann::json row = nlohmann::json::array();
            for (double v : r) row.push_back(number_or_null(v));
            rows.push_back(std::move(row));
        }
        tabs[t.name] = {{"columns", t.columns}, {"rows", std::move(rows)}};
    }
    return j;
}

const ReportTable& InequalityReport::table(const std::string& name) const {
    for (const auto& t : tables) {
        if (t.name == name) return t;
    }
    throw std::out_of_range("report has no table '" + name + "'");
}

const Criterion& InequalityReport::criterion(const std::string& name) const {
    for (const auto& c : criteria) {
        if (c.name == name) return c;
    }
    throw std::out_of_range("report has no criterion '" + name + "'");
}

std::string to_csv(const ReportTable& table) {
    std::string out;
    for (std::size_t i = 0; i < table.columns.size(); ++i) {
        out += (i ? "," : "") + table.columns[i];
    }
    out += '\n';
    char buf[64];
    for (const auto& row : table.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            std::snprintf(buf, sizeof buf, "%.17g", row[i]);
            out += (i ? "," : "");
            out += buf;
        }
        out += '\n';
    }
    return out;
}

namespace {

constexpr std::uint64_t tag_samples = 0x11;
constexpr std::uint64_t tag_tails = 0x22;
constexpr std::uint64_t tag_degeneracy = 0x33;
constexpr std::uint64_t tag_calibration = 0x44;
constexpr std::uint64_t tag_moment = 0x55;

class Setup {
public:
    Setup(const ExperimentConfig& c, const RunOptions& run)
        : config(c), params(c.params, "params"), threads(run.threads), root(c.seed) {}

    [[nodiscard]] std::size_t replications(std::uint64_t fallback) const {
        const std::uint64_t r = config.replications ? *config.replications : params.count("replications", fallback);
        if (r < 2) throw ConfigError(config.replications ? "replications" : params.field("replications"), "must be >= 2");
        return r;
    }

    [[nodiscard]] double smoothness() const { return config.space ? config.space->smoothness() : 2.0; }

    /// p in (1, r]; strict upper bound when `open_top`.
    [[nodiscard]] double exponent_p(bool open_top = false) const {
        const double r = smoothness();
        const double p = params.number("p", open_top ? 1.0 + (r - 1.0) / 2.0 : r);
        check_p(p, open_top);
        return p;
    }

    void check_p(double p, bool open_top = false) const {
        const double r = smoothness();
        const bool ok = open_top ? (p > 1.0 && p < r) : BanachSpace(1, r).admissible_p_range().contains(p);
        if (!ok) {
            throw ConfigError(params.field("p"), "must lie in (1, " + std::to_string(r) + (open_top ? ")" : "]"));
        }
    }

    [[nodiscard]] ConditionalMomentOptions moment_options() const {
        ConditionalMomentOptions o;
        o.outer = params.count("outer", 512);
        o.inner = params.count("inner", 512);
        o.seed = mix64(config.seed ^ tag_tails);
        o.threads = threads;
        o.space = config.space;
        return o;
    }

    [[nodiscard]] DegeneracyReport certify(const Kernel& h) const {
        DegeneracyOptions o;
        o.inner = params.count("degeneracy_inner", 256);
        o.outer = params.count("degeneracy_outer", 256);
        o.seed = mix64(config.seed ^ tag_degeneracy);
        o.threads = threads;
        return check_degeneracy(h, config.distribution, o);
    }

    /// Requires the all-but-one conditional means to vanish (when
    /// params.require_degenerate, default true).
    void require_degenerate(InequalityReport& report) const {
        if (!params.flag("require_degenerate", true)) return;
        const auto d = certify(config.kernel);
        report.summary["degeneracy_certified"] = d.degenerate.has_value() && *d.degenerate;
        if (!d.degenerate || !*d.degenerate) {
            throw ConfigError("kernel", d.degenerate ? "kernel is not degenerate under the configured law"
                                                     : "degeneracy of the kernel is inconclusive");
        }
    }

    /// params.d, or the certified order.
    [[nodiscard]] std::size_t degeneracy_order(InequalityReport& report) const {
        const std::size_t m = config.kernel.arity();
        if (params.has("d")) {
            const std::size_t d = params.count("d");
            if (d < 1 || d > m) throw ConfigError(params.field("d"), "must lie in [1, m]");
            report.summary["d_source"] = "config";
            return d;
        }
        const auto rep = certify(config.kernel);
        if (!rep.order || *rep.order == 0) {
            throw ConfigError("kernel", "could not certify a degeneracy order >= 1; set params.d");
        }
        report.summary["d_source"] = "certified";
        return *rep.order;
    }

    void require_unweighted() const {
        if (config.kernel.weighted()) {
            throw ConfigError("kernel", "weighted kernels are not supported by the '" + config.experiment +
                                            "' experiment");
        }
    }

    void require_symmetric() const {
        if (!config.kernel.symmetric()) throw ConfigError("kernel", "must be symmetric for '" + config.experiment + "'");
    }

    /// norms[r][k] = ||U_{m,k}|| for k = 0..n, replication r.
    [[nodiscard]] std::vector<std::vector<double>> replicate_norms(const Kernel& h, std::size_t n, std::size_t reps,
                                                                   const Stream& stream) const {
        std::vector<std::vector<double>> out(reps);
        parallel_for(reps, threads, [&](std::size_t r) {
            const auto sample = sample_iid(config.distribution, n, stream.child(r), 1);
            const auto prefix = prefix_ustats(h, sample, n, 1);
            std::vector<double> norms(n + 1);
            for (std::size_t k = 0; k <= n; ++k) norms[k] = norm_or_euclidean(config.space, prefix[k]);
            out[r] = std::move(norms);
        });
        return out;
    }

    const ExperimentConfig& config;
    ParamReader params;
    unsigned threads;
    Stream root;
};

double mean_of(std::span<const double> v) {
    CompensatedSum s;
    for (double x : v) s.add(x);
    return v.empty() ? 0.0 : s.value() / static_cast<double>(v.size());
}

double standard_error_of(std::span<const double> v) {
    if (v.size() < 2) return 0.0;
    const double m = mean_of(v);
    CompensatedSum s;
    for (double x : v) s.add((x - m) * (x - m));
    return std::sqrt(s.value() / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()));
}

double median_of(std::vector<double> v) {
    if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
    std::sort(v.begin(), v.end());
    const std::size_t h = v.size() / 2;
    return v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

double max_of(std::span<const double> v) {
    double best = -std::numeric_limits<double>::infinity();
    for (double x : v) best = std::max(best, x);
    return best;
}

double min_of(std::span<const double> v) {
    double best = std::numeric_limits<double>::infinity();
    for (double x : v) best = std::min(best, x);
    return best;
}

/// max / min, 1 when everything is zero, infinity when only the minimum is.
double spread_of(std::span<const double> v) {
    const double hi = max_of(v), lo = min_of(v);
    if (hi == 0.0 && lo == 0.0) return 1.0;
    return lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
}

Criterion check(std::string name, double value, const std::string& relation, double limit, bool diagnostic = false) {
    bool ok = false;
    if (relation == "<=") ok = value <= limit;
    if (relation == "<") ok = value < limit;
    if (relation == ">=") ok = value >= limit;
    if (relation == ">") ok = value > limit;
    return {std::move(name), value, limit, relation, ok && std::isfinite(value), diagnostic};
}

double running_max(std::span<const double> norms, std::size_t from, std::size_t to) {
    double best = 0.0;
    for (std::size_t k = from; k <= to; ++k) best = std::max(best, norms[k]);
    return best;
}

std::vector<std::size_t> as_sizes(const std::vector<std::uint64_t>& v, const std::string& field, std::size_t min) {
    std::vector<std::size_t> out;
    for (auto x : v) {
        if (x < min) throw ConfigError(field, "entries must be >= " + std::to_string(min));
        out.push_back(static_cast<std::size_t>(x));
    }
    return out;
}

std::vector<double> default_tau_grid() {
    std::vector<double> g;
    for (int i = 0; i < 8; ++i) g.push_back(0.5 + 3.0 * i / 7.0);
    return g;
}

void require_positive(const std::vector<double>& v, const std::string& field) {
    for (double x : v) {
        if (!(x > 0.0)) throw ConfigError(field, "entries must be positive");
    }
}

/// Number of ways to complete fixed values at positions J into a tuple of
/// Inc^m_N, tallied over all increasing value assignments to J.
std::map<std::uint64_t, std::uint64_t> completion_profile(std::size_t n, std::size_t m, Subset j) {
    const auto positions = subset_positions(j);
    std::map<std::uint64_t, std::uint64_t> profile;
    for (TupleCursor cur(n, positions.size()); !cur.done(); cur.advance()) {
        const auto v = cur.current();
        std::uint64_t count = count_tuples(v[0], positions[0]);
        for (std::size_t a = 1; a < positions.size() && count > 0; ++a) {
            count *= count_tuples(v[a] - v[a - 1] - 1, positions[a] - positions[a - 1] - 1);
        }
        count *= count_tuples(n - 1 - v.back(), m - 1 - positions.back());
        if (count > 0) ++profile[count];
    }
    return profile;
}

// ---------------------------------------------------------------- deviation

struct DeviationTails {
    EmpiricalTail norm;
    std::vector<std::pair<Subset, EmpiricalTail>> conditional;  // proper non-empty J
    double moment_p = 0.0;                                      // E||h||^p
};

DeviationTails deviation_tails(const Setup& s, const Kernel& h, double p) {
    const std::size_t m = h.arity();
    const auto cmo = s.moment_options();
    DeviationTails t;
    t.norm = kernel_norm_tail(h, s.config.distribution, s.params.count("norm_draws", 100000), cmo);
    t.moment_p = t.norm.mean_power(p);
    for (Subset j = 1; j < full_subset(m); ++j) {
        t.conditional.emplace_back(j, conditional_moment_tail(h, s.config.distribution, j, p, cmo).tail);
    }
    return t;
}

ReportTable deviation_table(const Setup& s, const Kernel& h, double t_factor, const std::vector<std::size_t>& grid,
                            const std::vector<double>& taus, double t_exponent, double p, double q,
                            std::size_t reps) {
    const std::size_t m = h.arity();
    const DeviationTails tails = deviation_tails(s, h, p);
    ReportTable table{"deviation",
                      {"N", "tau", "t", "lhs", "lhs_se", "term_norm", "term_conditional", "term_moment", "rhs",
                       "ratio", "rhs_general", "ratio_general"},
                      {}};
    for (std::size_t gi = 0; gi < grid.size(); ++gi) {
        const std::size_t n = grid[gi];
        const double nn = static_cast<double>(n);
        const auto norms = s.replicate_norms(h, n, reps, s.root.child(tag_samples).child(n));
        std::vector<double> maxima(reps);
        for (std::size_t r = 0; r < reps; ++r) maxima[r] = running_max(norms[r], m, n);

        std::vector<std::map<std::uint64_t, std::uint64_t>> profiles;
        for (const auto& [j, tail] : tails.conditional) profiles.push_back(completion_profile(n, m, j));
        const double total = static_cast<double>(count_tuples(n, m));

        for (double tau : taus) {
            const double t = t_factor * tau * std::pow(nn, t_exponent);
            std::size_t hits = 0;
            for (double v : maxima) hits += v > t ? 1 : 0;
            const double f = static_cast<double>(hits) / static_cast<double>(reps);
            const double se = std::sqrt(f * (1.0 - f) / static_cast<double>(reps));

            const double term_a = std::pow(nn, static_cast<double>(m)) * tails.norm.tail_integral(t, q);
            double term_b = 0.0, general_b = 0.0;
            for (std::size_t i = 0; i < tails.conditional.size(); ++i) {
                const auto& [j, tail] = tails.conditional[i];
                const double size_j = static_cast<double>(subset_size(j));
                term_b += std::pow(nn, size_j) *
                          tail.tail_integral(t / std::pow(nn, (static_cast<double>(m) - size_j) / p), q);
                for (const auto& [count, mult] : profiles[i]) {
                    general_b += static_cast<double>(mult) *
                                 tail.tail_integral(t / std::pow(static_cast<double>(count), 1.0 / p), q);
                }
            }
            const double term_c = std::pow(t, -q) * std::pow(nn, static_cast<double>(m) * q / p) *
                                  std::pow(tails.moment_p, q / p);
            const double rhs = term_a + term_b + term_c;
            const double rhs_general = total * tails.norm.tail_integral(t, q) + general_b +
                                       std::pow(t, -q) * std::pow(total * tails.moment_p, q / p);
            table.rows.push_back({nn, tau, t, f, se, term_a, term_b, term_c, rhs, rhs > 0.0 ? f / rhs : 0.0,
                                  rhs_general, rhs_general > 0.0 ? f / rhs_general : 0.0});
        }
    }
    return table;
}

std::vector<double> column(const ReportTable& t, const std::string& name) {
    const auto it = std::find(t.columns.begin(), t.columns.end(), name);
    if (it == t.columns.end()) throw std::out_of_range("no column " + name);
    const auto c = static_cast<std::size_t>(it - t.columns.begin());
    std::vector<double> out;
    for (const auto& r : t.rows) out.push_back(r[c]);
    return out;
}

void add_constant_criteria(InequalityReport& report, const std::vector<double>& ratios, double stability_limit) {
    const double c_hat = max_of(ratios);
    const double median = median_of(ratios);
    const double stability = median > 0.0 ? c_hat / median : std::numeric_limits<double>::infinity();
    report.summary["fitted_constant"] = number_or_null(c_hat);
    report.summary["median_ratio"] = number_or_null(median);
    report.summary["stability_score"] = number_or_null(stability);
    report.criteria.push_back(check("fitted constant finite and positive", c_hat, ">", 0.0));
    report.criteria.push_back(check("stability score (max/median ratio)", stability, "<=", stability_limit));
}

}  // namespace

InequalityReport deviation_experiment(const ExperimentConfig& config, const RunOptions& run) {
    const Setup s(config, run);
    s.require_unweighted();
    const std::size_t m = config.kernel.arity();
    const auto grid = as_sizes(s.params.counts("N_grid", {8, 16, 32}), s.params.field("N_grid"), m);
    const auto taus = s.params.numbers("t_grid", default_tau_grid());
    require_positive(taus, s.params.field("t_grid"));
    const double t_exponent = s.params.number("t_exponent", static_cast<double>(m) / 2.0);
    const double p = s.exponent_p();
    const double q = s.params.number("q", 4.0);
    if (!(q > 0.0)) throw ConfigError(s.params.field("q"), "must be positive");
    const double scale = s.params.number("scale_check", 0.0);
    if (scale < 0.0) throw ConfigError(s.params.field("scale_check"), "must be positive (0 disables)");
    const double limit = s.params.number("stability_limit", 10.0);
    const std::size_t reps = s.replications(10000);

    InequalityReport report;
    report.experiment = config.experiment;
    s.require_degenerate(report);
    report.summary.update({{"m", m}, {"p", p}, {"q", q}, {"replications", reps}, {"t_exponent", t_exponent}});

    report.tables.push_back(deviation_table(s, config.kernel, 1.0, grid, taus, t_exponent, p, q, reps));
    const auto& table = report.tables.back();
    const auto ratios = column(table, "ratio");
    add_constant_criteria(report, ratios, limit);

    const auto rhs = column(table, "rhs");
    const auto rhs_general = column(table, "rhs_general");
    double excess = 0.0;
    for (std::size_t i = 0; i < rhs.size(); ++i) excess = std::max(excess, rhs_general[i] / rhs[i] - 1.0);
    report.criteria.push_back(check("general-form bound does not exceed same-kernel bound (relative excess)", excess,
                                    "<=", 1e-12));

    if (scale > 0.0) {
        const Kernel hs = scaled(config.kernel, scale);
        ReportTable t2 = deviation_table(s, hs, scale, grid, taus, t_exponent, p, q, reps);
        t2.name = "deviation_scaled";
        const auto r2 = column(t2, "ratio");
        double worst = 0.0;
        for (std::size_t i = 0; i < ratios.size(); ++i) {
            const double denom = std::max(std::fabs(ratios[i]), std::fabs(r2[i]));
            if (denom > 0.0) worst = std::max(worst, std::fabs(ratios[i] - r2[i]) / denom);
        }
        report.summary["scale_factor"] = scale;
        report.tables.push_back(std::move(t2));
        report.criteria.push_back(check("ratio invariance under joint scaling (max relative change)", worst, "<=", 1e-12));
    }
    return report;
}

InequalityReport order_d_deviation_experiment(const ExperimentConfig& config, const RunOptions& run) {
    const Setup s(config, run);
    s.require_symmetric();
    s.require_unweighted();
    const std::size_t m = config.kernel.arity();
    const auto grid = as_sizes(s.params.counts("N_grid", {16, 32, 64}), s.params.field("N_grid"), m);
    const auto ts = s.params.numbers("t_grid", default_tau_grid());
    require_positive(ts, s.params.field("t_grid"));
    const double p = s.exponent_p();
    const double q = s.params.number("q", 4.0);
    if (!(q > 0.0)) throw ConfigError(s.params.field("q"), "must be positive");
    const double limit = s.params.number("stability_limit", 10.0);
    const std::size_t reps = s.replications(10000);

    InequalityReport report;
    report.experiment = config.experiment;
    const std::size_t d = s.degeneracy_order(report);
    const double dd = static_cast<double>(d);
    report.summary.update({{"m", m}, {"d", d}, {"p", p}, {"q", q}, {"replications", reps}});

    const auto h_tail = max_conditional_moment_tail(config.kernel, config.distribution, p, s.moment_options());
    ReportTable table{"order_d_deviation", {"N", "t", "threshold", "lhs", "lhs_se"}, {}};
    for (std::size_t j = 0; j <= m; ++j) table.columns.push_back("term_" + std::to_string(j));
    table.columns.insert(table.columns.end(), {"rhs", "ratio"});

    for (std::size_t n : grid) {
        const double nn = static_cast<double>(n);
        const auto norms = s.replicate_norms(config.kernel, n, reps, s.root.child(tag_samples).child(n));
        std::vector<double> maxima(reps);
        for (std::size_t r = 0; r < reps; ++r) maxima[r] = running_max(norms[r], m, n);
        for (double t : ts) {
            const double threshold = t * std::pow(nn, static_cast<double>(m) - dd + dd / p);
            std::size_t hits = 0;
            for (double v : maxima) hits += v > threshold ? 1 : 0;
            const double f = static_cast<double>(hits) / static_cast<double>(reps);
            std::vector<double> row{nn, t, threshold, f, std::sqrt(f * (1.0 - f) / static_cast<double>(reps))};
            double rhs = 0.0;
            for (std::size_t j = 0; j <= m; ++j) {
                const double jj = static_cast<double>(j);
                const double shift = (std::max(dd, jj) - dd) * (p - 1.0) / p + jj / p;
                const double term = std::pow(nn, jj) * h_tail.tail.tail_integral(t * std::pow(nn, shift), q);
                row.push_back(term);
                rhs += term;
            }
            row.push_back(rhs);
            row.push_back(rhs > 0.0 ? f / rhs : 0.0);
            table.rows.push_back(std::move(row));
        }
    }
    report.tables.push_back(std::move(table));
    add_constant_criteria(report, column(report.tables.back(), "ratio"), limit);

    // the j = 0 term does not involve N
    const auto term0 = column(report.tables.back(), "term_0");
    double drift = 0.0;
    for (std::size_t i = ts.size(); i < term0.size(); ++i) drift = std::max(drift, std::fabs(term0[i] - term0[i % ts.size()]));
    report.criteria.push_back(check("j=0 term independent of N (max abs drift)", drift, "<=", 0.0, true));
    return report;
}

InequalityReport moment_experiment(const ExperimentConfig& config, const RunOptions& run) {
    const Setup s(config, run);
    s.require_unweighted();
    const std::size_t m = config.kernel.arity();
    const auto grid = as_sizes(s.params.counts("N_grid", {8, 16, 32, 64}), s.params.field("N_grid"), m);
    const auto ps = s.params.numbers("p", {s.smoothness()});
    for (double p : ps) s.check_p(p);
    std::vector<double> qs = s.params.numbers("q", ps);
    if (qs.size() != ps.size()) throw ConfigError(s.params.field("q"), "must have one entry per p");
    for (std::size_t i = 0; i < ps.size(); ++i) {
        if (!(qs[i] >= ps[i])) throw ConfigError(s.params.field("q"), "must satisfy q >= p");
    }
    const double limit = s.params.number("stability_limit", 3.0);
    const std::size_t reps = s.replications(1000);

    InequalityReport report;
    report.experiment = config.experiment;
    s.require_degenerate(report);
    report.summary.update({{"m", m}, {"replications", reps}});

    std::vector<std::vector<double>> maxima;
    for (std::size_t n : grid) {
        const auto norms = s.replicate_norms(config.kernel, n, reps, s.root.child(tag_samples).child(n));
        std::vector<double> mx(reps);
        for (std::size_t r = 0; r < reps; ++r) mx[r] = running_max(norms[r], m, n);
        maxima.push_back(std::move(mx));
    }

    ReportTable table{"moment", {"p", "q", "N", "lhs", "lhs_se", "rhs", "ratio"}, {}};
    const auto cmo = s.moment_options();
    const EmpiricalTail norm_tail =
        kernel_norm_tail(config.kernel, config.distribution, s.params.count("norm_draws", 100000), cmo);
    for (std::size_t pi = 0; pi < ps.size(); ++pi) {
        const double p = ps[pi], q = qs[pi];
        const double moment_p = norm_tail.mean_power(p);
        const double moment_q = norm_tail.mean_power(q);
        std::vector<std::pair<double, double>> conditional;  // (|J|, E Z_J^q)
        if (q != p) {
            for (Subset j = 1; j < full_subset(m); ++j) {
                const auto tail = conditional_moment_tail(config.kernel, config.distribution, j, p, cmo).tail;
                conditional.emplace_back(static_cast<double>(subset_size(j)), tail.mean_power(q));
            }
        }
        std::vector<double> ratios;
        for (std::size_t gi = 0; gi < grid.size(); ++gi) {
            const double nn = static_cast<double>(grid[gi]);
            const double md = static_cast<double>(m);
            std::vector<double> powered(reps);
            for (std::size_t r = 0; r < reps; ++r) powered[r] = std::pow(maxima[gi][r], q);
            const double lhs = mean_of(powered);
            double rhs = 0.0;
            if (q == p) {
                rhs = std::pow(nn, md) * moment_p;
            } else {
                rhs = std::pow(nn, md) * moment_q + std::pow(std::pow(nn, md) * moment_p, q / p);
                for (const auto& [size_j, ez] : conditional) rhs += std::pow(nn, size_j + (md - size_j) * q / p) * ez;
            }
            const double ratio = rhs > 0.0 ? lhs / rhs : 0.0;
            ratios.push_back(ratio);
            table.rows.push_back({p, q, nn, lhs, standard_error_of(powered), rhs, ratio});
        }
        const std::string tag = "p=" + nlohmann::json(p).dump() + ",q=" + nlohmann::json(q).dump();
        report.criteria.push_back(check("fitted constant finite and positive (" + tag + ")", max_of(ratios), ">", 0.0));
        report.criteria.push_back(check("ratio spread across N (max/min, " + tag + ")", spread_of(ratios), "<=", limit));
        report.summary["fitted_constant"][tag] = number_or_null(max_of(ratios));
    }
    report.tables.push_back(std::move(table));
    return report;
}

InequalityReport lln_experiment(const ExperimentConfig& config, const RunOptions& run) {
    const Setup s(config, run);
    const std::size_t m = config.kernel.arity();
    auto horizons = as_sizes(s.params.counts("N_max_grid", {256, 512, 1024}), s.params.field("N_max_grid"), m);
    std::sort(horizons.begin(), horizons.end());
    const double p = s.exponent_p(true);
    const double limit = s.params.number("stability_limit", 3.0);
    const std::size_t reps = s.replications(1000);
    const double md = static_cast<double>(m);

    InequalityReport report;
    report.experiment = config.experiment;
    s.require_degenerate(report);
    report.summary.update({{"m", m}, {"p", p}, {"replications", reps}});

    const double moment_p = kernel_norm_moment(config.kernel, config.distribution, p,
                                               s.params.count("norm_draws", 100000), s.root.child(tag_moment),
                                               config.space);
    report.summary["kernel_moment_p"] = moment_p;

    // one path per replication up to the largest horizon
    const std::size_t top = horizons.back();
    const auto norms = s.replicate_norms(config.kernel, top, reps, s.root.child(tag_samples).child(top));

    ReportTable table{"lln", {"N_max", "weak_norm", "kernel_moment_p", "ratio", "terminal_median"}, {}};
    std::vector<double> ratios, medians;
    for (std::size_t horizon : horizons) {
        std::vector<double> sup(reps), terminal(reps);
        for (std::size_t r = 0; r < reps; ++r) {
            double best = 0.0;
            for (std::size_t n = m; n <= horizon; ++n) {
                best = std::max(best, std::pow(static_cast<double>(n), -md / p) * norms[r][n]);
            }
            sup[r] = best;
            terminal[r] = std::pow(static_cast<double>(horizon), -md / p) * norms[r][horizon];
        }
        const double weak = EmpiricalTail(sup).weak_lp_norm(p);
        const double ratio = moment_p > 0.0 ? weak / moment_p : 0.0;
        const double med = median_of(terminal);
        ratios.push_back(ratio);
        medians.push_back(med);
        table.rows.push_back({static_cast<double>(horizon), weak, moment_p, ratio, med});
    }
    report.tables.push_back(std::move(table));
    report.criteria.push_back(check("weak-norm ratio spread across horizons (max/min)", spread_of(ratios), "<=", limit));
    double worst_step = 0.0;  // largest median(next)/median(prev); < 1 means strictly decreasing
    for (std::size_t i = 1; i < medians.size(); ++i) {
        worst_step = std::max(worst_step, medians[i - 1] > 0.0 ? medians[i] / medians[i - 1]
                                                               : std::numeric_limits<double>::infinity());
    }
    if (medians.size() > 1) {
        report.criteria.push_back(check("terminal median decreases across horizons (max successive ratio)", worst_step,
                                        "<", 1.0));
    }

    if (s.params.has("alpha")) {
        const double alpha = s.params.number("alpha");
        const double gamma = s.params.number("gamma", 0.0);
        const double eps = s.params.number("eps", 1.0);
        if (!(eps > 0.0)) throw ConfigError(s.params.field("eps"), "must be positive");
        const std::size_t d = s.degeneracy_order(report);
        const double r = s.smoothness();
        nlohmann::json q_required = nlohmann::json::object();
        for (std::size_t j = 1; j <= m; ++j) {
            try {
                q_required[std::to_string(j)] = required_integrability(d, j, gamma, r, alpha);
            } catch (const std::domain_error& e) {
                throw ConfigError(s.params.field("alpha"), e.what());
            }
        }
        report.summary["rate"] = {{"alpha", alpha}, {"gamma", gamma}, {"eps", eps}, {"d", d},
                                  {"required_integrability", q_required}};
        // P(sup_{N<=n<=top} n^alpha ||U_n|| / C(n,m) > eps) for every N
        std::vector<std::size_t> hits(top + 1, 0);
        for (std::size_t rep = 0; rep < reps; ++rep) {
            double suffix = 0.0;
            for (std::size_t n = top; n >= 1; --n) {
                if (n >= m) {
                    suffix = std::max(suffix, std::pow(static_cast<double>(n), alpha) * norms[rep][n] /
                                                  static_cast<double>(count_tuples(n, m)));
                }
                if (suffix > eps) ++hits[n];
            }
        }
        ReportTable rate{"lln_rate", {"N", "probability", "partial_sum"}, {}};
        double partial = 0.0;
        double at_half = 0.0;
        for (std::size_t n = 1; n <= top; ++n) {
            const double prob = static_cast<double>(hits[n]) / static_cast<double>(reps);
            partial += std::pow(static_cast<double>(n), gamma) * prob;
            if (n == top / 2) at_half = partial;
            if ((n & (n - 1)) == 0 || n == top) rate.rows.push_back({static_cast<double>(n), prob, partial});
        }
        report.tables.push_back(std::move(rate));
        const double last_share = partial > 0.0 ? (partial - at_half) / partial : 0.0;
        report.summary["rate"]["last_doubling_share"] = last_share;
        report.criteria.push_back(check("rate series: share of partial sum from the last doubling", last_share, "<=",
                                        0.5, true));
    }
    return report;
}

InequalityReport holder_tightness_experiment(const ExperimentConfig& config, const RunOptions& run) {
    const Setup s(config, run);
    s.require_symmetric();
    const std::size_t m = config.kernel.arity();
    auto grid = as_sizes(s.params.counts("n_grid", {256, 1024}), s.params.field("n_grid"), std::max<std::size_t>(m, 2));
    std::sort(grid.begin(), grid.end());
    const double alpha = s.params.number("alpha", 0.3);
    try {
        (void)HolderParams(alpha);
    } catch (const std::invalid_argument&) {
        throw ConfigError(s.params.field("alpha"), "must lie in (0, 1/2)");
    }
    for (std::size_t n : grid) {
        if (n > max_holder_segments) {
            throw ConfigError(s.params.field("n_grid"), "entries must be <= " + std::to_string(max_holder_segments));
        }
    }
    const auto levels = s.params.numbers("quantiles", {0.5, 0.9});
    for (double l : levels) {
        if (!(l > 0.0 && l <= 1.0)) throw ConfigError(s.params.field("quantiles"), "entries must lie in (0, 1]");
    }
    const double quantile_limit = s.params.number("quantile_ratio_limit", 2.0);
    const std::size_t j_min = s.params.count("J_min", 2);
    const std::size_t j_max = s.params.count("J_max", 6);
    const std::size_t tight_n = s.params.count("tightness_n", grid.back());
    if (j_min > j_max) throw ConfigError(s.params.field("J_min"), "must not exceed J_max");
    if (tight_n < 2 || (std::size_t{1} << std::min<std::size_t>(j_max, 62)) > tight_n || j_max > 62) {
        throw ConfigError(s.params.field("J_max"), "exceeds floor(log2 n) for n = " + std::to_string(tight_n));
    }
    const double eps_quantile = s.params.number("eps_quantile", 0.9);
    if (!(eps_quantile > 0.0 && eps_quantile <= 1.0)) {
        throw ConfigError(s.params.field("eps_quantile"), "must lie in (0, 1]");
    }
    const std::size_t reps = s.replications(1000);

    InequalityReport report;
    report.experiment = config.experiment;
    const std::size_t d = s.degeneracy_order(report);
    const double dd = static_cast<double>(d);
    const double exponent = static_cast<double>(m) - dd / 2.0;
    report.summary.update({{"m", m}, {"d", d}, {"alpha", alpha}, {"p_alpha", HolderParams(alpha).moment_exponent()},
                           {"replications", reps}, {"normalization_exponent", exponent}});

    auto build_paths = [&](std::size_t n, const Stream& stream) {
        std::vector<PartialSumPath> paths;
        paths.reserve(reps);
        std::vector<std::optional<PartialSumPath>> slots(reps);
        parallel_for(reps, s.threads, [&](std::size_t r) {
            const auto sample = sample_iid(config.distribution, n, stream.child(r), 1);
            slots[r].emplace(partial_sum_path(config.kernel, sample, n, exponent, 1));
        });
        for (auto& p : slots) paths.push_back(std::move(*p));
        return paths;
    };

    ReportTable qtable{"holder_quantiles", {"n"}, {}};
    for (double l : levels) qtable.columns.push_back("q" + nlohmann::json(l).dump());
    std::vector<std::vector<double>> per_level(levels.size());
    std::vector<PartialSumPath> tight_paths;
    for (std::size_t n : grid) {
        auto paths = build_paths(n, s.root.child(tag_samples).child(n));
        std::vector<double> norms(reps);
        parallel_for(reps, s.threads, [&](std::size_t r) { norms[r] = holder_norm(paths[r], alpha, config.space, 1); });
        const EmpiricalTail tail(norms);
        std::vector<double> row{static_cast<double>(n)};
        for (std::size_t i = 0; i < levels.size(); ++i) {
            row.push_back(tail.quantile(levels[i]));
            per_level[i].push_back(row.back());
        }
        qtable.rows.push_back(std::move(row));
        if (n == tight_n) tight_paths = std::move(paths);
    }
    report.tables.push_back(std::move(qtable));
    for (std::size_t i = 0; i < levels.size(); ++i) {
        report.criteria.push_back(check("Hoelder-norm quantile " + nlohmann::json(levels[i]).dump() +
                                            " ratio across n (max/min)",
                                        spread_of(per_level[i]), "<=", quantile_limit));
    }

    if (tight_paths.empty()) tight_paths = build_paths(tight_n, s.root.child(tag_samples).child(tight_n));
    double eps = 0.0;
    if (s.params.has("eps")) {
        eps = s.params.number("eps");
        if (!(eps > 0.0)) throw ConfigError(s.params.field("eps"), "must be positive");
        report.summary["eps_source"] = "config";
    } else {
        // independent calibration batch
        const auto calib = build_paths(tight_n, s.root.child(tag_calibration).child(tight_n));
        std::vector<double> scales(reps);
        parallel_for(reps, s.threads, [&](std::size_t r) {
            scales[r] = max_normalized_increment(calib[r], alpha, dd, j_min, config.space);
        });
        eps = EmpiricalTail(scales).quantile(eps_quantile);
        report.summary["eps_source"] = "calibrated";
        report.summary["eps_quantile"] = eps_quantile;
    }
    report.summary["eps"] = eps;
    report.summary["tightness_n"] = tight_n;

    const auto table = dyadic_increment_exceedance(tight_paths, alpha, eps, dd, j_min, config.space);
    ReportTable cells{"exceedance", {"j", "k", "frequency"}, {}};
    for (const auto& c : table.cells) {
        cells.rows.push_back({static_cast<double>(c.level), static_cast<double>(c.position), c.frequency});
    }
    ReportTable curve{"tightness_curve", {"J", "tail_sum"}, {}};
    for (std::size_t i = 0; i < table.tail_sums.size(); ++i) {
        curve.rows.push_back({static_cast<double>(j_min + i), table.tail_sums[i]});
    }
    double worst = 0.0;  // largest T(J+1)/T(J) for J in [J_min, J_max); < 1 means strictly decreasing
    for (std::size_t j = j_min; j < j_max; ++j) {
        const double a = table.tail_sums[j - j_min], b = table.tail_sums[j + 1 - j_min];
        worst = std::max(worst, a > 0.0 ? b / a : std::numeric_limits<double>::infinity());
    }
    report.tables.push_back(std::move(cells));
    report.tables.push_back(std::move(curve));
    report.criteria.push_back(check("tail sum strictly decreasing over J in [" + std::to_string(j_min) + ", " +
                                        std::to_string(j_max) + "] (max successive ratio)",
                                    worst, "<", 1.0));
    return report;
}

InequalityReport incomplete_moment_report(const ExperimentConfig& config, const RunOptions& run) {
    const Setup s(config, run);
    s.require_symmetric();
    const std::size_t m = config.kernel.arity();
    if (config.design && config.design->variant() != SamplingDesign::Variant::Bernoulli) {
        throw ConfigError("design.variant", "the incomplete-moment experiment uses the Bernoulli design");
    }
    const auto grid = as_sizes(s.params.counts("n_grid", {32, 64, 128, 256}), s.params.field("n_grid"), m);
    const double p = s.exponent_p();
    const double q = s.params.number("q", p);
    if (!(q >= p)) throw ConfigError(s.params.field("q"), "must satisfy q >= p");
    const double limit = s.params.number("stability_limit", 5.0);
    const std::size_t reps = s.replications(10000);

    // each series: fixed p_n, or p_n = n^-e
    std::vector<std::pair<std::string, std::vector<std::pair<std::size_t, double>>>> series;
    if (s.params.has("p_n")) {
        for (double pn : s.params.numbers("p_n")) {
            if (!(pn >= 0.0 && pn <= 1.0)) throw ConfigError(s.params.field("p_n"), "entries must lie in [0, 1]");
            std::vector<std::pair<std::size_t, double>> g;
            for (std::size_t n : grid) g.emplace_back(n, pn);
            series.emplace_back("p_n=" + nlohmann::json(pn).dump(), std::move(g));
        }
    } else if (config.design) {
        std::vector<std::pair<std::size_t, double>> g;
        for (std::size_t n : grid) g.emplace_back(n, config.design->probability());
        series.emplace_back("p_n=" + nlohmann::json(config.design->probability()).dump(), std::move(g));
    } else {
        for (double e : s.params.numbers("p_n_exponents", {1.0, static_cast<double>(m)})) {
            if (!(e >= 0.0)) throw ConfigError(s.params.field("p_n_exponents"), "entries must be nonnegative");
            std::vector<std::pair<std::size_t, double>> g;
            for (std::size_t n : grid) g.emplace_back(n, std::pow(static_cast<double>(n), -e));
            series.emplace_back("p_n=n^-" + nlohmann::json(e).dump(), std::move(g));
        }
    }

    InequalityReport report;
    report.experiment = config.experiment;
    const std::size_t d = s.degeneracy_order(report);
    report.summary.update({{"m", m}, {"d", d}, {"p", p}, {"q", q}, {"replications", reps}});

    ReportTable table{"incomplete_moment", {"series", "n", "p_n", "moment_estimate", "standard_error", "bound_shape", "ratio"}, {}};
    for (std::size_t si = 0; si < series.size(); ++si) {
        IncompleteMomentOptions o;
        o.degeneracy_order = d;
        o.q = q;
        o.p = p;
        o.replications = reps;
        o.seed = mix64(config.seed ^ (tag_samples + si));
        o.threads = s.threads;
        o.kernel_moment_draws = s.params.count("norm_draws", 100000);
        o.space = config.space;
        const auto rows = incomplete_moment_experiment(config.kernel, config.distribution, series[si].second, o);
        std::vector<double> ratios;
        for (const auto& r : rows) {
            table.rows.push_back({static_cast<double>(si), static_cast<double>(r.n), r.p_n, r.moment_estimate,
                                  r.standard_error, r.bound_shape, r.ratio});
            ratios.push_back(r.ratio);
        }
        report.summary["series"][std::to_string(si)] = series[si].first;
        report.criteria.push_back(check("ratio spread across n (max/min, " + series[si].first + ")",
                                        spread_of(ratios), "<=", limit));
    }
    report.tables.push_back(std::move(table));
    return report;
}

InequalityReport run_experiment(const ExperimentConfig& config, const RunOptions& run) {
    const std::string& e = config.experiment;
    if (e == "deviation") return deviation_experiment(config, run);
    if (e == "order-d-deviation") return order_d_deviation_experiment(config, run);
    if (e == "moment") return moment_experiment(config, run);
    if (e == "lln") return lln_experiment(config, run);
    if (e == "holder") return holder_tightness_experiment(config, run);
    if (e == "incomplete-moment") return incomplete_moment_report(config, run);
    throw ConfigError("experiment", "unknown experiment '" + e + "'");
}

}  // namespace ustat
