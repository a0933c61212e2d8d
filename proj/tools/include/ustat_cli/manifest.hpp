#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace ustat::cli {

/// FNV-1a 64 of the compact JSON dump, as 16 hex digits.
std::string config_hash(const nlohmann::json& config);

/// UTC, ISO 8601 with seconds.
std::string utc_timestamp();

struct RunManifest {
    std::string config_hash;
    std::uint64_t seed = 0;
    std::string version;
    std::string experiment;
    unsigned threads = 0;
    std::string started_at;
    std::string written_at;
    std::vector<std::string> outputs;  // relative to the output directory

    [[nodiscard]] nlohmann::json to_json() const;
};

/// Writes text to dir/name, throwing std::runtime_error on failure.
void write_text_file(const std::filesystem::path& dir, const std::string& name, const std::string& text);

}  // namespace ustat::cli
