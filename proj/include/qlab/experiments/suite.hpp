#pragma once

#include "qlab/experiments/registry.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace qlab::experiments {

struct ManifestEntry {
    std::string label;
    std::filesystem::path config;  // resolved against the manifest directory
};

struct Manifest {
    int schema_version = kSchemaVersion;
    bool parallel = false;
    std::vector<ManifestEntry> experiments;
    std::filesystem::path source;
};

Manifest parse_manifest(const std::string& text, const std::string& source_name,
                        const std::filesystem::path& base_dir);
Manifest load_manifest(const std::filesystem::path& path);

struct SuiteEntryResult {
    std::string label;
    std::string id;
    std::filesystem::path output;
    bool pass = false;
    std::vector<std::string> failed_checks;
    std::string error;  // config or runtime failure; empty otherwise
    double wall_seconds = 0.0;
};

struct SuiteOptions {
    int jobs = 1;
    std::optional<std::uint64_t> seed;
    // Each experiment writes under <root>/<id> when set, else where its config says.
    std::optional<std::filesystem::path> root;
};

struct SuiteResult {
    std::vector<SuiteEntryResult> entries;  // manifest order
    bool pass() const;
    nlohmann::json to_json() const;
};

// Runs every entry; failures are recorded rather than thrown. An empty
// manifest passes.
SuiteResult run_suite(const Manifest& manifest, const SuiteOptions& options = {});

}  // namespace qlab::experiments
