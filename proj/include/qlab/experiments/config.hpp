#pragma once

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace qlab::experiments {

inline constexpr int kSchemaVersion = 1;
// Relative output directories are resolved under this prefix when it is set.
inline constexpr const char* kOutputPrefixEnv = "QLAB_OUTPUT_PREFIX";

// Schema violation anchored at a position in the source file (1-based).
class ConfigError : public std::runtime_error {
public:
    ConfigError(const std::string& source, int line, int column, const std::string& message);
    int line() const { return line_; }
    int column() const { return column_; }

private:
    int line_;
    int column_;
};

// Typed read access to a validated parameter table.
class Params {
public:
    explicit Params(nlohmann::json values) : values_(std::move(values)) {}
    double number(const std::string& key) const;
    int integer(const std::string& key) const;
    bool flag(const std::string& key) const;
    std::string text(const std::string& key) const;
    std::vector<double> numbers(const std::string& key) const;
    const nlohmann::json& json() const { return values_; }

private:
    const nlohmann::json& at(const std::string& key) const;
    nlohmann::json values_;
};

struct ExperimentConfig {
    int schema_version = kSchemaVersion;
    std::string id;
    std::string module;
    std::string operation;
    std::optional<std::uint64_t> seed;
    std::string output;        // empty: out/<id>
    nlohmann::json params;     // operation defaults overlaid with the file's values
    std::filesystem::path source;
};

// Parses and validates against the operation registry: unknown keys, type
// mismatches and a missing seed on a stochastic operation are all errors.
ExperimentConfig parse_config(const std::string& text, const std::string& source_name);
ExperimentConfig load_config(const std::filesystem::path& path);

// `out_override` wins; otherwise the config's directory, placed under the
// prefix from kOutputPrefixEnv when it is relative.
std::filesystem::path output_dir(const ExperimentConfig& config, const std::optional<std::string>& out_override = {});
std::filesystem::path apply_output_prefix(const std::filesystem::path& dir);

}  // namespace qlab::experiments
