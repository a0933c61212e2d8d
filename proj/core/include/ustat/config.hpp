#pragma once

// JSON configuration for kernels, laws, spaces, designs and experiments.
// Every validation failure is a ConfigError naming the offending field.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ustat/distribution.hpp"
#include "ustat/incomplete.hpp"
#include "ustat/kernel.hpp"
#include "ustat/spaces.hpp"

namespace ustat {

class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string field, const std::string& message)
        : std::runtime_error(field + ": " + message), field_(std::move(field)) {}
    [[nodiscard]] const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

/// Reads a JSON document; ConfigError("config") when unreadable or invalid.
[[nodiscard]] nlohmann::json load_json_file(const std::filesystem::path& path);

/// {"name": "product", "m": 2, "center": 0, "scale": 1}
/// or {"expr": "x1*x2" (or a list, one per coordinate), "m": 2, "symmetric": true}
/// ("arity" and "expressions" are accepted as long forms)
/// or a bare builtin name.
[[nodiscard]] Kernel parse_kernel(const nlohmann::json& node, const std::string& field = "kernel");

/// {"family": "rademacher" | "uniform" (a, b) | "gaussian" (mean, sd) |
///  "finite-discrete" (values, probabilities)} or a bare family name.
[[nodiscard]] Distribution parse_distribution(const nlohmann::json& node, const std::string& field = "distribution");

/// {"dimension": 1, "norm_exponent": 2}
[[nodiscard]] BanachSpace parse_space(const nlohmann::json& node, const std::string& field = "space");

/// {"variant": "bernoulli", "p_n": 0.01} or
/// {"variant": "without-replacement" | "with-replacement", "draws": N}
[[nodiscard]] SamplingDesign parse_design(const nlohmann::json& node, const std::string& field = "design");

/// Typed access to a JSON object with field-path error messages.
class ParamReader {
public:
    ParamReader(const nlohmann::json& node, std::string path);

    [[nodiscard]] bool has(const std::string& key) const;
    [[nodiscard]] double number(const std::string& key) const;
    [[nodiscard]] double number(const std::string& key, double fallback) const;
    [[nodiscard]] std::uint64_t count(const std::string& key) const;
    [[nodiscard]] std::uint64_t count(const std::string& key, std::uint64_t fallback) const;
    [[nodiscard]] bool flag(const std::string& key, bool fallback) const;
    [[nodiscard]] std::string text(const std::string& key) const;
    [[nodiscard]] std::string text(const std::string& key, const std::string& fallback) const;
    [[nodiscard]] std::vector<double> numbers(const std::string& key) const;
    [[nodiscard]] std::vector<double> numbers(const std::string& key, std::vector<double> fallback) const;
    [[nodiscard]] std::vector<std::uint64_t> counts(const std::string& key) const;
    [[nodiscard]] std::vector<std::uint64_t> counts(const std::string& key, std::vector<std::uint64_t> fallback) const;
    /// Path of a key, e.g. "params.t_grid".
    [[nodiscard]] std::string field(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

private:
    const nlohmann::json& at(const std::string& key) const;

    const nlohmann::json& node_;
    std::string path_;
};

struct ExperimentConfig {
    std::string experiment;
    nlohmann::json kernel_node;
    Kernel kernel;
    Distribution distribution;
    std::optional<BanachSpace> space;
    std::optional<SamplingDesign> design;
    std::uint64_t seed = 0;
    /// Explicit replication count (config or command line); experiments
    /// fall back to their own defaults when unset.
    std::optional<std::uint64_t> replications;
    nlohmann::json params = nlohmann::json::object();
    /// The parsed document, used for the report echo and the config hash.
    nlohmann::json source;
};

[[nodiscard]] const std::vector<std::string>& experiment_names();

/// Validates the document shape; experiment-specific parameters are checked
/// when the experiment runs.
[[nodiscard]] ExperimentConfig parse_experiment_config(const nlohmann::json& document);

}  // namespace ustat
