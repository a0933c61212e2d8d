#pragma once

// The `ustat` command line: compute, decompose and experiment run.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace ustat::cli {

enum ExitCode : int { exit_pass = 0, exit_criteria_failed = 1, exit_usage = 2 };

/// Parses argv and runs the selected subcommand. Results go to `out`,
/// diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Sample values from a CSV/whitespace separated text file.
std::vector<double> read_sample_file(const std::filesystem::path& path);

/// `ustat compute` on a parsed config document.
nlohmann::json compute(const nlohmann::json& config, std::uint64_t seed, unsigned threads);

/// `ustat decompose` on a parsed config document.
nlohmann::json decompose(const nlohmann::json& config, std::uint64_t seed, unsigned threads);

}  // namespace ustat::cli
