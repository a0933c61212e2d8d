#include "ustat/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

namespace ustat {
namespace {

template <typename F>
auto rethrow_as_config(const std::string& field, F&& f) -> decltype(f()) {
    try {
        return f();
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        throw ConfigError(field, e.what());
    }
}

}  // namespace

nlohmann::json load_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config", "cannot open '" + path.string() + "'");
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError("config", std::string("invalid JSON: ") + e.what());
    }
}

ParamReader::ParamReader(const nlohmann::json& node, std::string path) : node_(node), path_(std::move(path)) {
    if (!node_.is_object() && !node_.is_null()) throw ConfigError(path_, "expected an object");
}

bool ParamReader::has(const std::string& key) const { return node_.is_object() && node_.contains(key); }

const nlohmann::json& ParamReader::at(const std::string& key) const {
    if (!has(key)) throw ConfigError(field(key), "missing");
    return node_.at(key);
}

double ParamReader::number(const std::string& key) const {
    const auto& v = at(key);
    if (!v.is_number()) throw ConfigError(field(key), "expected a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) throw ConfigError(field(key), "must be finite");
    return x;
}

double ParamReader::number(const std::string& key, double fallback) const {
    return has(key) ? number(key) : fallback;
}

std::uint64_t ParamReader::count(const std::string& key) const {
    const auto& v = at(key);
    if (!v.is_number_integer() || (!v.is_number_unsigned() && v.get<long long>() < 0)) {
        throw ConfigError(field(key), "expected a nonnegative integer");
    }
    return v.get<std::uint64_t>();
}

std::uint64_t ParamReader::count(const std::string& key, std::uint64_t fallback) const {
    return has(key) ? count(key) : fallback;
}

bool ParamReader::flag(const std::string& key, bool fallback) const {
    if (!has(key)) return fallback;
    const auto& v = at(key);
    if (!v.is_boolean()) throw ConfigError(field(key), "expected true or false");
    return v.get<bool>();
}

std::string ParamReader::text(const std::string& key) const {
    const auto& v = at(key);
    if (!v.is_string()) throw ConfigError(field(key), "expected a string");
    return v.get<std::string>();
}

std::string ParamReader::text(const std::string& key, const std::string& fallback) const {
    return has(key) ? text(key) : fallback;
}

std::vector<double> ParamReader::numbers(const std::string& key) const {
    const auto& v = at(key);
    if (v.is_number()) return {number(key)};
    if (!v.is_array() || v.empty()) throw ConfigError(field(key), "expected a non-empty array of numbers");
    std::vector<double> out;
    for (const auto& e : v) {
        if (!e.is_number() || !std::isfinite(e.get<double>())) {
            throw ConfigError(field(key), "expected a non-empty array of numbers");
        }
        out.push_back(e.get<double>());
    }
    return out;
}

std::vector<double> ParamReader::numbers(const std::string& key, std::vector<double> fallback) const {
    return has(key) ? numbers(key) : fallback;
}

std::vector<std::uint64_t> ParamReader::counts(const std::string& key) const {
    const auto& v = at(key);
    if (v.is_number()) return {count(key)};
    if (!v.is_array() || v.empty()) throw ConfigError(field(key), "expected a non-empty array of integers");
    std::vector<std::uint64_t> out;
    for (const auto& e : v) {
        if (!e.is_number_integer() || (!e.is_number_unsigned() && e.get<long long>() < 0)) {
            throw ConfigError(field(key), "expected a non-empty array of nonnegative integers");
        }
        out.push_back(e.get<std::uint64_t>());
    }
    return out;
}

std::vector<std::uint64_t> ParamReader::counts(const std::string& key, std::vector<std::uint64_t> fallback) const {
    return has(key) ? counts(key) : fallback;
}

Kernel parse_kernel(const nlohmann::json& node, const std::string& field) {
    if (node.is_null()) throw ConfigError(field, "missing");
    if (node.is_string()) {
        return rethrow_as_config(field, [&] { return builtin_kernel(node.get<std::string>()); });
    }
    const ParamReader r(node, field);
    const std::string arity_key = r.has("m") ? "m" : "arity";
    const std::size_t arity = r.count(arity_key, 2);
    if (arity == 0 || arity > 16) throw ConfigError(r.field(arity_key), "must lie in [1, 16]");
    const std::string expr_key = r.has("expr") ? "expr" : "expressions";
    Kernel h = [&] {
        if (r.has(expr_key)) {
            const auto& list = node.at(expr_key);
            std::vector<std::string> exprs;
            if (list.is_string()) {
                exprs.push_back(list.get<std::string>());
            } else if (list.is_array() && !list.empty()) {
                for (const auto& e : list) {
                    if (!e.is_string()) throw ConfigError(r.field(expr_key), "expected strings");
                    exprs.push_back(e.get<std::string>());
                }
            } else {
                throw ConfigError(r.field(expr_key), "expected a string or a non-empty array of strings");
            }
            return rethrow_as_config(r.field(expr_key),
                                     [&] { return expression_kernel(exprs, arity, r.flag("symmetric", false)); });
        }
        if (!r.has("name")) throw ConfigError(field, "needs \"name\" or \"expr\"");
        BuiltinOptions opts;
        opts.arity = arity;
        opts.center = r.number("center", 0.0);
        const std::string name = r.text("name");
        return rethrow_as_config(r.field("name"), [&] { return builtin_kernel(name, opts); });
    }();
    const double scale = r.number("scale", 1.0);
    return scale == 1.0 ? h : scaled(h, scale);
}

Distribution parse_distribution(const nlohmann::json& node, const std::string& field) {
    if (node.is_null()) throw ConfigError(field, "missing");
    const nlohmann::json wrapped = node.is_string() ? nlohmann::json{{"family", node}} : node;
    const ParamReader r(wrapped, field);
    const std::string family = r.text("family");
    return rethrow_as_config(field, [&] {
        if (family == "rademacher") return Distribution::rademacher();
        if (family == "uniform") return Distribution::uniform(r.number("a", -1.0), r.number("b", 1.0));
        if (family == "gaussian") return Distribution::gaussian(r.number("mean", 0.0), r.number("sd", 1.0));
        if (family == "finite-discrete") {
            return Distribution::finite_discrete(r.numbers("values"), r.numbers("probabilities"));
        }
        throw ConfigError(r.field("family"),
                          "unknown family '" + family + "' (rademacher, uniform, gaussian, finite-discrete)");
    });
}

BanachSpace parse_space(const nlohmann::json& node, const std::string& field) {
    const ParamReader r(node, field);
    return rethrow_as_config(field, [&] { return BanachSpace(r.count("dimension", 1), r.number("norm_exponent", 2.0)); });
}

SamplingDesign parse_design(const nlohmann::json& node, const std::string& field) {
    const ParamReader r(node, field);
    const std::string variant = r.text("variant");
    if (variant == "bernoulli") {
        return rethrow_as_config(r.field("p_n"), [&] { return SamplingDesign::bernoulli(r.number("p_n")); });
    }
    if (variant == "without-replacement") return SamplingDesign::without_replacement(r.count("draws"));
    if (variant == "with-replacement") return SamplingDesign::with_replacement(r.count("draws"));
    throw ConfigError(r.field("variant"),
                      "unknown variant '" + variant + "' (bernoulli, without-replacement, with-replacement)");
}

const std::vector<std::string>& experiment_names() {
    static const std::vector<std::string> names{"deviation", "order-d-deviation", "moment",
                                                "lln",       "holder",            "incomplete-moment"};
    return names;
}

ExperimentConfig parse_experiment_config(const nlohmann::json& document) {
    if (!document.is_object()) throw ConfigError("config", "expected a JSON object");
    const ParamReader r(document, "");
    const std::string name = r.text("experiment");
    const auto& names = experiment_names();
    if (std::find(names.begin(), names.end(), name) == names.end()) {
        throw ConfigError("experiment", "unknown experiment '" + name + "'");
    }
    if (!r.has("kernel")) throw ConfigError("kernel", "missing");
    if (!r.has("distribution")) throw ConfigError("distribution", "missing");

    ExperimentConfig c{name,
                       document.at("kernel"),
                       parse_kernel(document.at("kernel")),
                       parse_distribution(document.at("distribution")),
                       std::nullopt,
                       std::nullopt,
                       r.count("seed", 0),
                       std::nullopt,
                       nlohmann::json::object(),
                       document};
    if (r.has("space")) {
        c.space = parse_space(document.at("space"));
        if (c.space->dimension() != c.kernel.dimension()) {
            throw ConfigError("space.dimension", "does not match the kernel dimension " +
                                                     std::to_string(c.kernel.dimension()));
        }
    }
    if (r.has("design")) c.design = parse_design(document.at("design"));
    if (r.has("replications")) {
        c.replications = r.count("replications");
        if (*c.replications == 0) throw ConfigError("replications", "must be >= 1");
    }
    if (r.has("params")) {
        if (!document.at("params").is_object()) throw ConfigError("params", "expected an object");
        c.params = document.at("params");
    }
    return c;
}

}  // namespace ustat
