#pragma once

#include <json.hpp>

#include <filesystem>
#include <map>
#include <string>
#include <variant>
#include <vector>

namespace qlab::experiments {

using Cell = std::variant<double, std::string>;

// Plot-ready table written as one CSV file.
struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;
    void add(std::vector<Cell> row);
};

enum class Relation { AtMost, AtLeast, Equal };

struct Check {
    std::string name;
    double value;
    double limit;
    Relation relation;
    bool pass() const;  // NaN never passes
};

struct RunReport {
    std::string id;
    std::string module;
    std::string operation;
    int schema_version = 1;
    nlohmann::json seed;  // null for deterministic operations
    nlohmann::json parameters;
    std::map<std::string, double> metrics;
    std::vector<Check> checks;
    std::map<std::string, Table> tables;
    double wall_seconds = 0.0;  // kept out of report.json

    void metric(const std::string& name, double value) { metrics[name] = value; }
    void at_most(const std::string& name, double value, double limit);
    void at_least(const std::string& name, double value, double limit);
    void holds(const std::string& name, bool ok);
    Table& table(const std::string& name, std::vector<std::string> columns);

    bool pass() const;
    std::vector<std::string> failed_checks() const;
    // Deterministic document: sorted keys, no timing.
    nlohmann::json to_json() const;
};

// Shortest round-trip form for finite values; inf, -inf and nan as words.
nlohmann::json number_json(double v);
// 17 significant digits.
std::string format_number(double v);
std::string csv_field(const std::string& raw);
std::string to_csv(const Table& t);

// report.json, timing.json and <table>.csv under `dir`.
void write_artifacts(const RunReport& report, const std::filesystem::path& dir);

}  // namespace qlab::experiments
