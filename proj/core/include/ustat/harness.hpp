#pragma once

// End-to-end experiments: Monte Carlo left-hand sides against computed
// right-hand sides of the deviation, moment, weak-L^p, Hoelder and
// incomplete-moment bounds, with fitted constants and stability checks.
//
// Reports depend only on the configuration and the master seed, never on
// the worker count.

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ustat/config.hpp"

namespace ustat {

struct Criterion {
    std::string name;
    double value = 0.0;
    double limit = 0.0;
    std::string relation;  // "<=", ">=", "<", ">"
    bool passed = false;
    /// Reported but not part of the verdict.
    bool diagnostic = false;
};

struct ReportTable {
    std::string name;
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
};

struct InequalityReport {
    std::string experiment;
    nlohmann::json summary = nlohmann::json::object();
    std::vector<ReportTable> tables;
    std::vector<Criterion> criteria;

    /// True when every non-diagnostic criterion passed.
    [[nodiscard]] bool passed() const noexcept;
    [[nodiscard]] nlohmann::json to_json() const;
    [[nodiscard]] const ReportTable& table(const std::string& name) const;
    [[nodiscard]] const Criterion& criterion(const std::string& name) const;
};

/// CSV with a header row; numbers printed with 17 significant digits.
[[nodiscard]] std::string to_csv(const ReportTable& table);

struct RunOptions {
    unsigned threads = 0;
};

[[nodiscard]] InequalityReport deviation_experiment(const ExperimentConfig& config, const RunOptions& run = {});
[[nodiscard]] InequalityReport order_d_deviation_experiment(const ExperimentConfig& config,
                                                            const RunOptions& run = {});
[[nodiscard]] InequalityReport moment_experiment(const ExperimentConfig& config, const RunOptions& run = {});
[[nodiscard]] InequalityReport lln_experiment(const ExperimentConfig& config, const RunOptions& run = {});
[[nodiscard]] InequalityReport holder_tightness_experiment(const ExperimentConfig& config,
                                                           const RunOptions& run = {});
[[nodiscard]] InequalityReport incomplete_moment_report(const ExperimentConfig& config, const RunOptions& run = {});

/// Dispatch on config.experiment.
[[nodiscard]] InequalityReport run_experiment(const ExperimentConfig& config, const RunOptions& run = {});

}  // namespace ustat
