#pragma once

#include "qlab/experiments/config.hpp"
#include "qlab/experiments/report.hpp"

#include <functional>

namespace qlab::experiments {

struct RunContext {
    Params params;
    std::uint64_t seed;  // 0 for deterministic operations
    int jobs;
    RunReport& report;
};

struct Operation {
    std::string module;
    std::string name;
    std::string summary;
    bool stochastic;
    nlohmann::json defaults;  // flat table; value types fix the schema
    std::function<void(RunContext&)> run;
};

const std::vector<Operation>& operations();
const Operation* find_operation(const std::string& module, const std::string& name);

struct RunOptions {
    int jobs = 1;
    std::optional<std::uint64_t> seed;  // overrides the config seed
};

// Exceptions thrown by the operation propagate to the caller.
RunReport run_experiment(const ExperimentConfig& config, const RunOptions& options = {});

}  // namespace qlab::experiments
