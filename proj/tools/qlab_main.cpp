#include "qlab/experiments/suite.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

namespace ex = qlab::experiments;

namespace {

constexpr int kExitFail = 1;
constexpr int kExitSchema = 2;

struct CommonFlags {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    int jobs = 1;
};

void print_report(const ex::RunReport& r, const std::filesystem::path& dir) {
    for (const ex::Check& c : r.checks) {
        std::cout << (c.pass() ? "  pass  " : "  FAIL  ") << c.name << " = " << ex::number_json(c.value).dump();
        if (c.relation != ex::Relation::Equal)
            std::cout << (c.relation == ex::Relation::AtMost ? " <= " : " >= ") << ex::number_json(c.limit).dump();
        std::cout << '\n';
    }
    std::cout << r.module << '.' << r.operation << " [" << r.id << "] " << (r.pass() ? "PASS" : "FAIL") << " -> "
              << dir.generic_string() << '\n';
}

int run_single(const std::string& module, const CommonFlags& f) {
    const ex::ExperimentConfig config = ex::load_config(f.config);
    if (config.module != module) {
        std::ifstream in(f.config);
        std::string text;
        int line = 1;
        for (int n = 1; std::getline(in, text); ++n)
            if (text.rfind("module:", 0) == 0) line = n;
        throw ex::ConfigError(f.config, line, 1, "config is for module '" + config.module + "', not '" + module + "'");
    }
    const ex::RunReport report = ex::run_experiment(config, {f.jobs, f.seed});
    const std::filesystem::path dir = ex::output_dir(config, f.out);
    ex::write_artifacts(report, dir);
    print_report(report, dir);
    return report.pass() ? 0 : kExitFail;
}

int run_suite(const std::string& manifest_path, const CommonFlags& f) {
    const ex::Manifest manifest = ex::load_manifest(manifest_path);
    ex::SuiteOptions opts{f.jobs, f.seed, std::nullopt};
    if (f.out) opts.root = *f.out;
    const ex::SuiteResult result = ex::run_suite(manifest, opts);
    for (const auto& e : result.entries) {
        std::cout << (e.pass ? "PASS  " : "FAIL  ") << e.label;
        if (!e.id.empty()) std::cout << " [" << e.id << "]";
        if (!e.error.empty()) std::cout << "  error: " << e.error;
        for (const auto& c : e.failed_checks) std::cout << "  " << c;
        std::cout << '\n';
    }
    std::cout << result.entries.size() << " experiments, " << (result.pass() ? "all passed" : "some failed") << '\n';
    const std::filesystem::path summary_dir = f.out ? std::filesystem::path(*f.out) : ex::apply_output_prefix("out");
    std::filesystem::create_directories(summary_dir);
    std::ofstream(summary_dir / "suite.json") << result.to_json().dump(2) << '\n';
    return result.pass() ? 0 : kExitFail;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Numerical experiments for quantum information, large deviations and filtering"};
    app.require_subcommand(1);

    const std::pair<const char*, const char*> modules[] = {
        {"qstate", "quantum state identities and fidelity"},
        {"qhypo", "quantum hypothesis testing"},
        {"ineq", "matrix inequality families"},
        {"ldp", "large deviation rate functions"},
        {"stoch", "stochastic process checks"},
        {"qdyn", "Wigner, fluctuation and QNN dynamics"},
        {"filter", "classical and quantum filters"},
        {"sigproc", "subspace estimation and LMS"},
    };
    CommonFlags flags;
    std::string manifest;
    std::vector<std::pair<std::string, CLI::App*>> subs;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--seed", flags.seed, "Override the config seed");
        sub->add_option("--out", flags.out, "Output directory");
        sub->add_option("--jobs", flags.jobs, "Worker threads")->check(CLI::PositiveNumber);
    };
    for (const auto& [name, help] : modules) {
        CLI::App* sub = app.add_subcommand(name, help);
        sub->add_option("--config", flags.config, "Experiment YAML file")->required()->check(CLI::ExistingFile);
        add_common(sub);
        subs.emplace_back(name, sub);
    }
    CLI::App* suite = app.add_subcommand("suite", "Run every experiment in a manifest");
    suite->add_option("--manifest", manifest, "Manifest YAML file")->required()->check(CLI::ExistingFile);
    add_common(suite);
    CLI::App* list = app.add_subcommand("list", "List the registered operations");

    CLI11_PARSE(app, argc, argv);

    try {
        if (list->parsed()) {
            for (const ex::Operation& op : ex::operations())
                std::cout << op.module << '.' << op.name << (op.stochastic ? "  (seeded)  " : "  ") << op.summary << '\n';
            return 0;
        }
        if (suite->parsed()) return run_suite(manifest, flags);
        for (const auto& [name, sub] : subs)
            if (sub->parsed()) return run_single(name, flags);
    } catch (const ex::ConfigError& e) {
        std::cerr << e.what() << '\n';
        return kExitSchema;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitFail;
    }
    return kExitFail;
}
