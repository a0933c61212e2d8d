#include "ustat_cli/commands.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ostream.h>

#include "ustat/config.hpp"
#include "ustat/harness.hpp"
#include "ustat/hoeffding.hpp"
#include "ustat/incomplete.hpp"
#include "ustat/parallel.hpp"
#include "ustat/ustatistic.hpp"
#include "ustat_cli/manifest.hpp"

#ifndef USTAT_VERSION_STRING
#define USTAT_VERSION_STRING "0.0.0"
#endif

namespace ustat::cli {

namespace {

constexpr std::uint64_t tag_sample = 0x5A;
constexpr std::uint64_t tag_design = 0xDE;

nlohmann::json point_json(const Point& p) {
    if (p.size() == 1) return p.front();
    return p;
}

std::optional<BanachSpace> optional_space(const nlohmann::json& config, const Kernel& h) {
    if (!config.contains("space")) return std::nullopt;
    BanachSpace s = parse_space(config.at("space"));
    if (s.dimension() != h.dimension()) {
        throw ConfigError("space.dimension", "does not match the kernel dimension " + std::to_string(h.dimension()));
    }
    return s;
}

Kernel required_kernel(const nlohmann::json& config) {
    if (!config.is_object()) throw ConfigError("config", "expected a JSON object");
    if (!config.contains("kernel")) throw ConfigError("kernel", "missing");
    return parse_kernel(config.at("kernel"));
}

ExpectationPath parse_path(const ParamReader& r) {
    const std::string p = r.text("path", "auto");
    if (p == "auto") return ExpectationPath::Auto;
    if (p == "exact") return ExpectationPath::Exact;
    if (p == "monte-carlo") return ExpectationPath::MonteCarlo;
    throw ConfigError(r.field("path"), "expected auto, exact or monte-carlo");
}

nlohmann::json check_json(const ConditionalMeanCheck& c) {
    return {{"conditioning", subset_positions(c.conditioning)},
            {"energy", c.energy},
            {"standard_error", c.standard_error},
            {"norm_estimate", c.norm_estimate},
            {"verdict", to_string(c.verdict)}};
}

nlohmann::json report_json(const DegeneracyReport& d) {
    nlohmann::json j{{"arity", d.arity},       {"exact", d.exact},
                     {"inner", d.inner},       {"outer", d.outer},
                     {"scale", d.scale},       {"energy_scale", d.energy_scale},
                     {"degenerate", nullptr},  {"order", nullptr}};
    if (d.degenerate) j["degenerate"] = *d.degenerate;
    if (d.order) j["order"] = *d.order;
    auto& abo = j["all_but_one"] = nlohmann::json::array();
    for (const auto& c : d.all_but_one) abo.push_back(check_json(c));
    auto& lv = j["levels"] = nlohmann::json::array();
    for (const auto& c : d.levels) lv.push_back(check_json(c));
    return j;
}

std::uint64_t resolve_seed(const nlohmann::json& config, std::optional<std::uint64_t> flag) {
    if (flag) return *flag;
    return ParamReader(config, "").count("seed", 0);
}

int report_error(std::ostream& err, const std::exception& e) {
    if (const auto* c = dynamic_cast<const ConfigError*>(&e)) {
        fmt::print(err, "configuration error: {}\n", c->what());
    } else {
        fmt::print(err, "error: {}\n", e.what());
    }
    return exit_usage;
}

int run_experiment_command(const std::filesystem::path& config_path, const std::filesystem::path& out_dir,
                           std::optional<std::uint64_t> seed, std::optional<std::uint64_t> replications,
                           unsigned threads, std::ostream& out) {
    nlohmann::json doc = load_json_file(config_path);
    if (!doc.is_object()) throw ConfigError("config", "expected a JSON object");
    doc["seed"] = resolve_seed(doc, seed);
    if (replications) doc["replications"] = *replications;
    const ExperimentConfig config = parse_experiment_config(doc);

    RunManifest manifest;
    manifest.config_hash = config_hash(doc);
    manifest.seed = config.seed;
    manifest.version = USTAT_VERSION_STRING;
    manifest.experiment = config.experiment;
    manifest.threads = resolve_threads(threads);
    manifest.started_at = utc_timestamp();

    const InequalityReport report = run_experiment(config, RunOptions{threads});

    nlohmann::json report_doc = report.to_json();
    report_doc["version"] = USTAT_VERSION_STRING;
    report_doc["seed"] = config.seed;
    report_doc["config_hash"] = manifest.config_hash;
    report_doc["config"] = doc;

    std::vector<std::pair<std::string, std::string>> files{{"report.json", report_doc.dump(2) + "\n"}};
    for (const auto& t : report.tables) files.emplace_back(t.name + ".csv", to_csv(t));

    std::filesystem::create_directories(out_dir);
    manifest.outputs.push_back("manifest.json");
    for (const auto& [name, text] : files) manifest.outputs.push_back(name);
    manifest.written_at = utc_timestamp();
    write_text_file(out_dir, "manifest.json", manifest.to_json().dump(2) + "\n");
    for (const auto& [name, text] : files) write_text_file(out_dir, name, text);

    std::size_t passed = 0, gated = 0;
    for (const auto& c : report.criteria) {
        if (c.diagnostic) continue;
        ++gated;
        passed += c.passed ? 1 : 0;
    }
    const auto c_hat = report.summary.find("fitted_constant");
    fmt::print(out, "{}: {} ({}/{} criteria passed){}\n", config.experiment, report.passed() ? "PASS" : "FAIL",
               passed, gated,
               c_hat != report.summary.end() && c_hat->is_number() ? fmt::format(", C_hat={:.6g}", c_hat->get<double>())
                                                                   : std::string());
    for (const auto& c : report.criteria) {
        fmt::print(out, "  [{}] {} = {:.6g} {} {:.6g}\n", c.diagnostic ? "info" : (c.passed ? "pass" : "FAIL"),
                   c.name, c.value, c.relation, c.limit);
    }
    return report.passed() ? exit_pass : exit_criteria_failed;
}

}  // namespace

std::vector<double> read_sample_file(const std::filesystem::path& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("data_file", "cannot read " + path.string());
    std::string text((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    std::replace_if(text.begin(), text.end(), [](char c) { return c == ',' || c == ';'; }, ' ');
    std::istringstream in(text);
    std::vector<double> values;
    std::string token;
    while (in >> token) {
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(token, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != token.size()) {
            // tolerate a single header token in front
            if (values.empty() && token.find_first_of("0123456789") == std::string::npos) continue;
            throw ConfigError("data_file", "non-numeric token '" + token + "'");
        }
        values.push_back(v);
    }
    if (values.empty()) throw ConfigError("data_file", "no sample values in " + path.string());
    return values;
}

nlohmann::json compute(const nlohmann::json& config, std::uint64_t seed, unsigned threads) {
    const Kernel h = required_kernel(config);
    const ParamReader r(config, "");
    const std::size_t m = h.arity();

    std::vector<double> sample;
    if (r.has("data")) {
        sample = r.numbers("data");
    } else if (r.has("data_file")) {
        sample = read_sample_file(r.text("data_file"));
    } else if (r.has("distribution")) {
        if (!r.has("n")) throw ConfigError("n", "required with a synthetic distribution");
        const Distribution dist = parse_distribution(config.at("distribution"));
        sample = sample_iid(dist, r.count("n"), Stream(seed).child(tag_sample), threads);
    } else {
        throw ConfigError("data", "provide data, data_file, or distribution with n");
    }
    const std::size_t n = r.count("n", sample.size());
    if (n > sample.size()) throw ConfigError("n", "exceeds the number of sample values");
    if (n < m) throw ConfigError("n", "must be at least the kernel arity " + std::to_string(m));
    const auto space = optional_space(config, h);

    nlohmann::json result;
    if (r.has("design")) {
        const SamplingDesign design = parse_design(config.at("design"));
        const WeightSet weights = draw_design(design, n, m, Stream(seed).child(tag_design));
        result["value"] = point_json(incomplete_ustat(h, sample, weights, threads));
        result["n"] = n;
        result["m"] = m;
        result["running_max"] = nlohmann::json::array();
        result["design"] = design.describe();
        result["selected_tuples"] = weights.size();
        result["total_weight"] = weights.total_weight();
    } else {
        UStatOptions o;
        o.threads = threads;
        o.running_max = r.flag("running_max", true);
        o.space = space;
        const UStatResult u = complete_ustat(h, sample, n, o);
        result["value"] = point_json(u.value);
        result["n"] = u.n;
        result["m"] = u.m;
        result["running_max"] = u.running_max;
    }
    result["kernel"] = h.name();
    result["weighted"] = h.weighted();
    return result;
}

nlohmann::json decompose(const nlohmann::json& config, std::uint64_t seed, unsigned threads) {
    const Kernel h = required_kernel(config);
    if (!config.contains("distribution")) throw ConfigError("distribution", "missing");
    const Distribution dist = parse_distribution(config.at("distribution"));
    const ParamReader r(config, "");

    DegeneracyOptions o;
    o.inner = r.count("inner", 1024);
    o.outer = r.count("outer", 256);
    if (o.inner < 2) throw ConfigError("inner", "must be >= 2");
    if (o.outer < 2) throw ConfigError("outer", "must be >= 2");
    o.seed = seed;
    o.path = parse_path(r);
    o.threads = threads;

    nlohmann::json result;
    result["kernel"] = h.name();
    result["distribution"] = dist.describe();
    result["symmetric"] = h.symmetric();
    result["report"] = report_json(check_degeneracy(h, dist, o));

    ProjectionOptions po;
    po.inner = o.inner;
    po.seed = mix64(seed ^ 0xC0);
    po.path = o.path;

    auto component_report = [&](const HoeffdingComponent& c) {
        DegeneracyOptions co = o;
        co.seed = mix64(seed ^ 0xC1);
        if (!c.exact()) co.noise_floor = c.mc_noise_energy(r.count("noise_probes", 64), Stream(seed).child(0xC2));
        nlohmann::json j = report_json(check_degeneracy(c.as_kernel(), dist, co));
        j["projection_exact"] = c.exact();
        j["noise_floor"] = co.noise_floor;
        return j;
    };

    if (r.has("level")) {
        const std::size_t level = r.count("level");
        if (!h.symmetric()) throw ConfigError("level", "level components require a symmetric kernel");
        if (level < 1 || level > h.arity()) throw ConfigError("level", "must lie in [1, m]");
        result["level"] = level;
        result["component"] = component_report(project_degenerate_level(h, level, dist, po));
    }
    if (r.has("positions")) {
        std::vector<std::size_t> positions;
        for (auto p : r.counts("positions")) positions.push_back(static_cast<std::size_t>(p));
        Subset s = 0;
        try {
            s = subset_from_positions(positions, h.arity());
        } catch (const std::invalid_argument& e) {
            throw ConfigError("positions", e.what());
        }
        if (s == 0) throw ConfigError("positions", "must be non-empty");
        result["positions"] = positions;
        result["component"] = component_report(project_component(h, s, dist, po));
    }
    if (const std::size_t samples = r.count("reconstruction_samples", 0); samples > 0) {
        const auto rc = reconstruct_identity_check(h, dist, samples, po);
        result["reconstruction"] = {{"samples", samples},
                                    {"max_deviation", rc.max_deviation},
                                    {"max_aggregate_se", rc.max_aggregate_se},
                                    {"exact", rc.exact}};
    }
    return result;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"U-statistics: evaluation, Hoeffding decomposition and inequality experiments", "ustat"};
    app.require_subcommand(1);
    app.set_version_flag("--version", USTAT_VERSION_STRING);

    std::string config_path;
    std::string out_dir;
    std::optional<std::uint64_t> seed;
    std::optional<std::uint64_t> replications;
    unsigned threads = 0;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--config", config_path, "JSON configuration file")->required();
        cmd->add_option("--seed", seed, "master seed (default: config seed, else 0)");
        cmd->add_option("--threads", threads, "worker threads (default: USTAT_THREADS, else all cores)")
            ->check(CLI::PositiveNumber);
    };

    CLI::App* compute_cmd = app.add_subcommand("compute", "complete, weighted or incomplete U-statistic");
    add_common(compute_cmd);
    CLI::App* decompose_cmd = app.add_subcommand("decompose", "Hoeffding projections and degeneracy report");
    add_common(decompose_cmd);
    CLI::App* experiment_cmd = app.add_subcommand("experiment", "inequality experiments");
    experiment_cmd->require_subcommand(1);
    CLI::App* run_cmd = experiment_cmd->add_subcommand("run", "run one experiment configuration");
    add_common(run_cmd);
    run_cmd->add_option("--out", out_dir, "output directory")->required();
    run_cmd->add_option("--replications", replications, "override the replication count")
        ->check(CLI::PositiveNumber);

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    if (!reversed.empty()) reversed.pop_back();  // program name
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return exit_pass;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return exit_pass;
    } catch (const CLI::CallForVersion&) {
        out << USTAT_VERSION_STRING << "\n";
        return exit_pass;
    } catch (const CLI::ParseError& e) {
        fmt::print(err, "usage error: {}\n", e.what());
        return exit_usage;
    }

    if (threads > 0) set_default_threads(threads);
    try {
        if (*compute_cmd) {
            const auto doc = load_json_file(config_path);
            out << compute(doc, resolve_seed(doc, seed), threads).dump(2) << "\n";
            return exit_pass;
        }
        if (*decompose_cmd) {
            const auto doc = load_json_file(config_path);
            out << decompose(doc, resolve_seed(doc, seed), threads).dump(2) << "\n";
            return exit_pass;
        }
        return run_experiment_command(config_path, out_dir, seed, replications, threads, out);
    } catch (const std::exception& e) {
        return report_error(err, e);
    }
}

}  // namespace ustat::cli
