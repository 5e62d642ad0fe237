#include "qlab/experiments/suite.hpp"

#include <yaml-cpp/yaml.h>

#include <fstream>
#include <future>
#include <sstream>

namespace qlab::experiments {

namespace {

[[noreturn]] void fail(const std::string& source, const YAML::Node& node, const std::string& message) {
    const YAML::Mark m = node.Mark();
    if (m.is_null()) throw ConfigError(source, 1, 1, message);
    throw ConfigError(source, m.line + 1, m.column + 1, message);
}

SuiteEntryResult run_entry(const ManifestEntry& entry, const SuiteOptions& options) {
    SuiteEntryResult out;
    out.label = entry.label;
    try {
        const ExperimentConfig config = load_config(entry.config);
        out.id = config.id;
        out.output = options.root ? *options.root / config.id : output_dir(config);
        const RunReport report = run_experiment(config, {options.jobs, options.seed});
        write_artifacts(report, out.output);
        out.pass = report.pass();
        out.failed_checks = report.failed_checks();
        out.wall_seconds = report.wall_seconds;
    } catch (const std::exception& e) {
        out.pass = false;
        out.error = e.what();
    }
    return out;
}

}  // namespace

Manifest parse_manifest(const std::string& text, const std::string& source_name,
                        const std::filesystem::path& base_dir) {
    YAML::Node root;
    try {
        root = YAML::Load(text);
    } catch (const YAML::ParserException& e) {
        throw ConfigError(source_name, e.mark.line + 1, e.mark.column + 1, e.msg);
    }
    Manifest m;
    m.source = source_name;
    if (!root.IsMap()) fail(source_name, root, "manifest must be a mapping");
    for (const auto& kv : root) {
        const std::string key = kv.first.as<std::string>();
        const YAML::Node& v = kv.second;
        try {
            if (key == "schema_version") {
                m.schema_version = v.as<int>();
                if (m.schema_version != kSchemaVersion)
                    fail(source_name, v, "unsupported schema_version " + std::to_string(m.schema_version));
            } else if (key == "parallel") {
                m.parallel = v.as<bool>();
            } else if (key == "experiments") {
                if (v.IsNull()) continue;
                if (!v.IsSequence()) fail(source_name, v, "experiments must be a list");
                for (const auto& item : v) {
                    ManifestEntry e;
                    std::string path;
                    if (item.IsScalar()) {
                        path = item.as<std::string>();
                        e.label = std::filesystem::path(path).stem().string();
                    } else if (item.IsMap()) {
                        for (const auto& f : item) {
                            const std::string k = f.first.as<std::string>();
                            if (k == "label") e.label = f.second.as<std::string>();
                            else if (k == "config") path = f.second.as<std::string>();
                            else fail(source_name, f.first, "unknown experiment key '" + k + "'");
                        }
                        if (path.empty()) fail(source_name, item, "experiment entry needs a config");
                        if (e.label.empty()) e.label = std::filesystem::path(path).stem().string();
                    } else {
                        fail(source_name, item, "experiment entry must be a path or a mapping");
                    }
                    const std::filesystem::path p(path);
                    e.config = p.is_absolute() ? p : base_dir / p;
                    m.experiments.push_back(std::move(e));
                }
            } else {
                fail(source_name, kv.first, "unknown manifest key '" + key + "'");
            }
        } catch (const YAML::BadConversion&) {
            fail(source_name, v, "wrong type for '" + key + "'");
        }
    }
    return m;
}

Manifest load_manifest(const std::filesystem::path& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError(path.string(), 1, 1, "cannot open manifest");
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_manifest(ss.str(), path.string(), path.parent_path());
}

bool SuiteResult::pass() const {
    for (const auto& e : entries)
        if (!e.pass) return false;
    return true;
}

nlohmann::json SuiteResult::to_json() const {
    nlohmann::json list = nlohmann::json::array();
    for (const auto& e : entries) {
        list.push_back({{"label", e.label},
                        {"id", e.id},
                        {"output", e.output.generic_string()},
                        {"pass", e.pass},
                        {"failed_checks", e.failed_checks},
                        {"error", e.error}});
    }
    return {{"pass", pass()}, {"experiments", list}};
}

SuiteResult run_suite(const Manifest& manifest, const SuiteOptions& options) {
    SuiteResult result;
    if (manifest.parallel && manifest.experiments.size() > 1) {
        std::vector<std::future<SuiteEntryResult>> running;
        for (const auto& e : manifest.experiments)
            running.push_back(std::async(std::launch::async, run_entry, std::cref(e), std::cref(options)));
        for (auto& f : running) result.entries.push_back(f.get());
    } else {
        for (const auto& e : manifest.experiments) result.entries.push_back(run_entry(e, options));
    }
    return result;
}

}  // namespace qlab::experiments
