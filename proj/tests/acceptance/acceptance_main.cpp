#include "qlab/experiments/suite.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <set>

namespace ex = qlab::experiments;

// Runs the acceptance manifest and prints one line per criterion. The exit
// status is zero when the set of failing criteria equals --expected-fail, so
// a known-unattainable criterion stays visible without breaking ctest.
int main(int argc, char** argv) {
    CLI::App app{"Acceptance criteria runner"};
    std::string manifest_path, out = "acceptance_out";
    std::vector<int> expected;
    int jobs = 1;
    app.add_option("manifest", manifest_path, "Acceptance manifest")->required()->check(CLI::ExistingFile);
    app.add_option("--expected-fail", expected, "Criterion numbers known to fail");
    app.add_option("--out", out, "Artifact root");
    app.add_option("--jobs", jobs, "Worker threads per experiment")->check(CLI::PositiveNumber);
    CLI11_PARSE(app, argc, argv);

    ex::SuiteResult result;
    try {
        result = ex::run_suite(ex::load_manifest(manifest_path), {jobs, std::nullopt, out});
    } catch (const std::exception& e) {
        std::cerr << e.what() << '\n';
        return 2;
    }

    std::set<int> failing;
    for (std::size_t i = 0; i < result.entries.size(); ++i) {
        const ex::SuiteEntryResult& e = result.entries[i];
        const int criterion = static_cast<int>(i) + 1;
        if (!e.pass) failing.insert(criterion);
        std::cout << "criterion " << criterion << ": " << (e.pass ? "PASS" : "FAIL") << "  " << e.label;
        if (!e.error.empty()) std::cout << "  error: " << e.error;
        if (!e.failed_checks.empty()) {
            std::cout << "  failed:";
            for (const auto& c : e.failed_checks) std::cout << ' ' << c;
        }
        std::cout << "  (" << ex::number_json(e.wall_seconds).dump() << " s)\n";
    }
    const std::set<int> want(expected.begin(), expected.end());
    std::cout << result.entries.size() - failing.size() << '/' << result.entries.size() << " criteria pass";
    if (!want.empty()) std::cout << "; expected failures:" << [&] {
        std::string s;
        for (int c : want) s += ' ' + std::to_string(c);
        return s;
    }();
    std::cout << '\n';
    return failing == want ? 0 : 1;
}
