#include "qlab/experiments/report.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace qlab::experiments {

void Table::add(std::vector<Cell> row) {
    if (row.size() != columns.size()) throw std::logic_error("Table::add: row width does not match the header");
    rows.push_back(std::move(row));
}

bool Check::pass() const {
    if (std::isnan(value) || std::isnan(limit)) return false;
    switch (relation) {
        case Relation::AtMost: return value <= limit;
        case Relation::AtLeast: return value >= limit;
        case Relation::Equal: return value == limit;
    }
    return false;
}

void RunReport::at_most(const std::string& name, double value, double limit) {
    checks.push_back({name, value, limit, Relation::AtMost});
}

void RunReport::at_least(const std::string& name, double value, double limit) {
    checks.push_back({name, value, limit, Relation::AtLeast});
}

void RunReport::holds(const std::string& name, bool ok) { checks.push_back({name, ok ? 1.0 : 0.0, 1.0, Relation::Equal}); }

Table& RunReport::table(const std::string& name, std::vector<std::string> columns) {
    Table& t = tables[name];
    t.columns = std::move(columns);
    t.rows.clear();
    return t;
}

bool RunReport::pass() const {
    for (const Check& c : checks)
        if (!c.pass()) return false;
    return true;
}

std::vector<std::string> RunReport::failed_checks() const {
    std::vector<std::string> out;
    for (const Check& c : checks)
        if (!c.pass()) out.push_back(c.name);
    return out;
}

nlohmann::json number_json(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    return v;
}

std::string format_number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string csv_field(const std::string& raw) {
    if (raw.find_first_of(",\"\r\n") == std::string::npos) return raw;
    std::string out = "\"";
    for (char c : raw) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + '"';
}

std::string to_csv(const Table& t) {
    std::string out;
    auto line = [&out](const auto& cells, auto&& text) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) out += ',';
            out += csv_field(text(cells[i]));
        }
        out += "\r\n";
    };
    line(t.columns, [](const std::string& s) { return s; });
    for (const auto& row : t.rows) {
        line(row, [](const Cell& c) {
            return std::holds_alternative<double>(c) ? format_number(std::get<double>(c)) : std::get<std::string>(c);
        });
    }
    return out;
}

nlohmann::json RunReport::to_json() const {
    nlohmann::json j;
    j["id"] = id;
    j["module"] = module;
    j["operation"] = operation;
    j["schema_version"] = schema_version;
    j["seed"] = seed;
    j["parameters"] = parameters;
    j["pass"] = pass();
    nlohmann::json m = nlohmann::json::object();
    for (const auto& [k, v] : metrics) m[k] = number_json(v);
    j["metrics"] = m;
    nlohmann::json c = nlohmann::json::object();
    for (const Check& chk : checks) {
        const char* rel = chk.relation == Relation::AtMost ? "<=" : chk.relation == Relation::AtLeast ? ">=" : "==";
        c[chk.name] = {{"value", number_json(chk.value)}, {"limit", number_json(chk.limit)}, {"relation", rel},
                       {"pass", chk.pass()}};
    }
    j["checks"] = c;
    nlohmann::json tabs = nlohmann::json::object();
    for (const auto& [name, t] : tables) tabs[name] = {{"file", name + ".csv"}, {"rows", t.rows.size()}};
    j["tables"] = tabs;
    return j;
}

namespace {

void write_file(const std::filesystem::path& path, const std::string& body) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + path.string());
    f << body;
}

}  // namespace

void write_artifacts(const RunReport& report, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    write_file(dir / "report.json", report.to_json().dump(2) + "\n");
    const nlohmann::json timing = {{"id", report.id}, {"wall_seconds", report.wall_seconds}};
    write_file(dir / "timing.json", timing.dump(2) + "\n");
    for (const auto& [name, t] : report.tables) write_file(dir / (name + ".csv"), to_csv(t));
}

}  // namespace qlab::experiments
