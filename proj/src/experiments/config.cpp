#include "qlab/experiments/config.hpp"
#include "qlab/experiments/registry.hpp"

#include <yaml-cpp/yaml.h>

#include <cctype>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

namespace qlab::experiments {

ConfigError::ConfigError(const std::string& source, int line, int column, const std::string& message)
    : std::runtime_error(source + ":" + std::to_string(line) + ":" + std::to_string(column) + ": " + message),
      line_(line),
      column_(column) {}

const nlohmann::json& Params::at(const std::string& key) const {
    if (!values_.contains(key)) throw std::out_of_range("parameter '" + key + "' is not defined");
    return values_.at(key);
}

double Params::number(const std::string& key) const { return at(key).get<double>(); }
int Params::integer(const std::string& key) const { return at(key).get<int>(); }
bool Params::flag(const std::string& key) const { return at(key).get<bool>(); }
std::string Params::text(const std::string& key) const { return at(key).get<std::string>(); }
std::vector<double> Params::numbers(const std::string& key) const { return at(key).get<std::vector<double>>(); }

namespace {

class Reader {
public:
    explicit Reader(std::string source) : source_(std::move(source)) {}

    [[noreturn]] void fail(const YAML::Node& node, const std::string& message) const {
        const YAML::Mark m = node.Mark();
        if (m.is_null()) throw ConfigError(source_, 1, 1, message);
        throw ConfigError(source_, m.line + 1, m.column + 1, message);
    }

    template <class T>
    T scalar(const YAML::Node& node, const std::string& what, const char* expected) const {
        if (!node.IsScalar()) fail(node, what + ": expected " + expected);
        try {
            return node.as<T>();
        } catch (const YAML::Exception&) {
            fail(node, what + ": expected " + expected + ", got '" + node.Scalar() + "'");
        }
    }

    // Converts `node` to the JSON type of `like`.
    nlohmann::json convert(const YAML::Node& node, const nlohmann::json& like, const std::string& what) const {
        if (like.is_boolean()) return scalar<bool>(node, what, "a boolean");
        if (like.is_number_integer()) return scalar<long long>(node, what, "an integer");
        if (like.is_number()) return scalar<double>(node, what, "a number");
        if (like.is_string()) return scalar<std::string>(node, what, "a string");
        if (like.is_array()) {
            if (!node.IsSequence()) fail(node, what + ": expected a sequence");
            const nlohmann::json element = like.empty() ? nlohmann::json(0.0) : like.front();
            nlohmann::json out = nlohmann::json::array();
            for (std::size_t i = 0; i < node.size(); ++i) {
                out.push_back(convert(node[i], element, what + "[" + std::to_string(i) + "]"));
            }
            return out;
        }
        fail(node, what + ": unsupported parameter type");
    }

    const std::string& source() const { return source_; }

private:
    std::string source_;
};

bool valid_id(const std::string& id) {
    if (id.empty()) return false;
    for (char c : id)
        if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.')) return false;
    return id != "." && id != "..";
}

}  // namespace

ExperimentConfig parse_config(const std::string& text, const std::string& source_name) {
    Reader r(source_name);
    YAML::Node root;
    try {
        root = YAML::Load(text);
    } catch (const YAML::ParserException& e) {
        throw ConfigError(source_name, e.mark.line + 1, e.mark.column + 1, e.msg);
    }
    if (!root.IsMap()) r.fail(root, "config must be a mapping");

    static const std::set<std::string> known{"schema_version", "id", "module", "operation", "seed", "output", "params"};
    for (const auto& kv : root) {
        const std::string key = kv.first.as<std::string>();
        if (!known.count(key)) r.fail(kv.first, "unknown key '" + key + "'");
    }
    for (const char* key : {"schema_version", "id", "module", "operation"}) {
        if (!root[key]) r.fail(root, std::string("missing required key '") + key + "'");
    }

    ExperimentConfig c;
    c.source = source_name;
    c.schema_version = r.scalar<int>(root["schema_version"], "schema_version", "an integer");
    if (c.schema_version != kSchemaVersion) {
        r.fail(root["schema_version"], "unsupported schema_version " + std::to_string(c.schema_version));
    }
    c.id = r.scalar<std::string>(root["id"], "id", "a string");
    if (!valid_id(c.id)) r.fail(root["id"], "id must be non-empty and use only letters, digits, '_', '-' and '.'");
    c.module = r.scalar<std::string>(root["module"], "module", "a string");
    c.operation = r.scalar<std::string>(root["operation"], "operation", "a string");
    const Operation* op = find_operation(c.module, c.operation);
    if (!op) r.fail(root["operation"], "unknown operation '" + c.module + "." + c.operation + "'");

    if (root["seed"]) c.seed = r.scalar<std::uint64_t>(root["seed"], "seed", "a non-negative integer");
    if (op->stochastic && !c.seed) r.fail(root, "seed is mandatory for the stochastic operation '" + c.module + "." + c.operation + "'");
    if (root["output"]) c.output = r.scalar<std::string>(root["output"], "output", "a string");

    c.params = op->defaults;
    if (const YAML::Node p = root["params"]) {
        if (p.IsNull()) return c;
        if (!p.IsMap()) r.fail(p, "params must be a mapping");
        for (const auto& kv : p) {
            const std::string key = kv.first.as<std::string>();
            if (!op->defaults.contains(key)) r.fail(kv.first, "unknown parameter '" + key + "' for " + c.module + "." + c.operation);
            c.params[key] = r.convert(kv.second, op->defaults.at(key), "params." + key);
        }
    }
    return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError(path.string(), 1, 1, "cannot open config file");
    std::ostringstream ss;
    ss << f.rdbuf();
    return parse_config(ss.str(), path.string());
}

std::filesystem::path apply_output_prefix(const std::filesystem::path& dir) {
    const char* prefix = std::getenv(kOutputPrefixEnv);
    if (dir.is_absolute() || !prefix || !*prefix) return dir;
    return std::filesystem::path(prefix) / dir;
}

std::filesystem::path output_dir(const ExperimentConfig& config, const std::optional<std::string>& out_override) {
    if (out_override) return *out_override;
    return apply_output_prefix(config.output.empty() ? std::filesystem::path("out") / config.id
                                                     : std::filesystem::path(config.output));
}

}  // namespace qlab::experiments
