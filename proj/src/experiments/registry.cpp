#include "qlab/experiments/registry.hpp"

#include "ops.hpp"

#include <chrono>

namespace qlab::experiments {

using nlohmann::json;

const std::vector<Operation>& operations() {
    static const std::vector<Operation> table = {
        {"qstate", "identities", "Random-instance identity suite for states, channels and entropies", true,
         {{"instances", 1000}, {"min_dim", 2}, {"max_dim", 6}, {"mixture_size", 3}, {"slack", 1e-9},
          {"dilation_tol", 1e-10}},
         ops::qstate_identities},
        {"qstate", "fidelity", "Qubit fidelity against the closed form and the purification supremum", false,
         {{"radius_a", 0.8}, {"radius_b", 0.6}, {"angles", {0.0, 0.5, 1.0, 1.5707963267948966, 3.141592653589793}},
          {"tolerance", 1e-10}},
         ops::qstate_fidelity},
        {"qhypo", "stein_sweep", "Stein exponent sweep with frontier dominance and the Chernoff bound", true,
         {{"rho_radius", 0.6}, {"rho_angle", 0.0}, {"sigma_radius", 0.98}, {"sigma_angle", 0.9}, {"n_max", 8},
          {"alpha", 0.1}, {"random_tests", 200}, {"exponent_tolerance", 0.25}, {"min_divergence", 0.3},
          {"max_divergence", 1.0}},
         ops::qhypo_stein_sweep},
        {"ineq", "suite", "Matrix inequality families on random instances plus the Lieb violation probe", true,
         {{"instances", 500}, {"max_dim", 5}, {"probe_instances", 200}, {"probe_dim", 3},
          {"t_grid", {0.0, 0.1, 0.25, 0.5, 0.75, 0.9, 1.0}}, {"s_grid", {0.25, 0.5, 0.75}}},
         ops::ineq_suite},
        {"ineq", "lieb", "Lieb inequality on commuting instances, or on the violation probe", true,
         {{"instances", 100}, {"dim", 3}, {"probe", false}, {"s_grid", {0.25, 0.5, 0.75}}},
         ops::ineq_lieb},
        {"ldp", "markov_duality", "Donsker-Varadhan and tilted-eigenvalue rates on random chains", true,
         {{"chains", 50}, {"min_states", 2}, {"max_states", 6}, {"iid_cases", 10}, {"duality_tol", 1e-4},
          {"stationary_tol", 1e-6}, {"iid_tol", 1e-5}},
         ops::ldp_markov_duality},
        {"stoch", "processes", "Queue, Brownian, branching, priority-queue and diffusion-exit checks", true,
         {{"arrival_rate", 1.0}, {"service_rate", 2.0}, {"queue_horizon", 50}, {"queue_trials", 100000},
          {"ks_limit", 0.02}, {"brownian_times", {0.25, 0.5, 0.75, 1.0}}, {"brownian_paths", 200000},
          {"haar_levels", 8}, {"kl_terms", 200}, {"covariance_relative_tol", 0.02},
          {"offspring", {0.25, 0.0, 0.75}}, {"extinction_tol", 1e-8}, {"lambda1", 0.3}, {"lambda2", 0.25},
          {"mu1", 1.0}, {"mu2", 0.9}, {"priority_truncation", 40}, {"priority_time", 200.0},
          {"priority_l1_tol", 1e-4}, {"exit_drift_rate", 0.5}, {"exit_eps", {0.0707, 0.05}}, {"exit_trials", 400},
          {"exit_dt", 0.01}, {"exit_max_steps", 100000000}, {"exit_slope_tol", 0.15}},
         ops::stoch_processes},
        {"qdyn", "wigner", "Wigner marginals, quadratic exactness and the hbar^2 scaling of the correction", true,
         {{"marginal_states", 5}, {"marginal_nq", 40}, {"marginal_dq", 0.2}, {"marginal_np", 48},
          {"marginal_hbar", 0.7}, {"marginal_tol", 1e-6}, {"quadratic_coefficients", {0.0, 0.3, 0.5}},
          {"quadratic_hbar", 0.8}, {"quadratic_steps", 20}, {"quartic_coefficients", {0.0, 0.0, 0.5, 0.0, 0.25}},
          {"quartic_hbars", {0.4, 0.2, 0.1}}, {"quartic_horizon", 0.3}, {"quartic_box", 8.0},
          {"quartic_dq_per_hbar", 0.2}, {"quartic_np", 160}, {"slope_target", 2.0},
          {"slope_tol", 0.15}},
         ops::qdyn_wigner},
        {"qdyn", "fluctuation", "Gibbs stationarity of the Fokker-Planck operator and GKSL damping", false,
         {{"mass", 1.5}, {"gamma", 0.4}, {"beta", 2.0}, {"harmonic_omega", 1.2},
          {"quartic_coefficients", {0.0, 0.0, -0.5, 0.0, 0.25}}, {"mismatch_scales", {0.5, 0.8, 1.05, 1.2, 2.0}},
          {"residual_tol", 1e-8}, {"basis_dim", 30}, {"coherent_re", 1.5}, {"coherent_im", 0.5},
          {"jump_q_re", 1.0}, {"jump_q_im", 0.0}, {"jump_p_re", 0.0}, {"jump_p_im", 1.0}, {"t_end", 3.0},
          {"dt", 0.01}, {"damping_tol", 1e-3}},
         ops::qdyn_fluctuation},
        {"qdyn", "qnn", "Quantum neural network tracking task and the WKB amplitude check", false,
         {{"alpha", 5.0}, {"beta", 1.0}, {"record_every", 100}, {"norm_tol", 1e-8}, {"l1_limit", 0.15},
          {"wkb_energy", 2.0}, {"wkb_ramp_slope", 0.05}, {"wkb_lower", 0.0}, {"wkb_upper", 20.0}, {"wkb_tol", 0.05}},
         ops::qdyn_qnn},
        {"filter", "crosscheck", "Belavkin and Kushner filters on a shared record, and the GKSL ensemble", true,
         {{"basis_dim", 64}, {"omega", 1.0}, {"coupling", 1.0}, {"true_alpha", 1.0}, {"horizon", 1.0},
          {"dt", 1e-3}, {"grid_points", 121}, {"rms_limit", 0.05}, {"ensemble_basis_dim", 24},
          {"ensemble_horizon", 0.5}, {"ensemble_dt", 2e-3}, {"ensemble_trajectories", 400}, {"z_limit", 4.0}},
         ops::filter_crosscheck},
        {"filter", "linear", "Kalman versus Wiener, sigma-point gain and recursive least squares", true,
         {{"ar_a1", -0.9}, {"ar_a2", 0.4}, {"process_var", 1.0}, {"noise_var", 0.5}, {"wiener_length", 200},
          {"wiener_tol", 1e-6}, {"sigma_points", 4096}, {"ukf_steps", 60}, {"ukf_burn", 20}, {"ukf_tol", 0.02},
          {"rls_dim", 4}, {"rls_samples", 200}, {"rls_noise", 0.3}, {"rls_tol", 1e-9}},
         ops::filter_linear},
        {"filter", "controller", "LDP-scored tracking gains: scalar optimum and Monte Carlo ranking", true,
         {{"g0", 0.7}, {"g1", 0.5}, {"g2", 2.0}, {"noise_var", 0.3}, {"grid_start", -2.0}, {"grid_spacing", 0.013},
          {"grid_count", 201}, {"scalar_horizon", 30}, {"scalar_threshold", 2.0}, {"model_q", 0.04},
          {"model_r", 0.09}, {"sigma_points", 512},
          {"model_gains", {-2.0, -1.5, -1.0, -0.8, -0.6, -0.4, -0.2, 0.0, 0.2, 0.4, 0.6, 0.8, 1.0, 1.5, 2.0}},
          {"model_horizon", 12}, {"model_threshold", 1.0}, {"mc_threshold", 1.5}, {"mc_trials", 20000}},
         ops::filter_controller},
        {"sigproc", "subspace", "MUSIC and ESPRIT recovery and first-order perturbation predictions", true,
         {{"sensors", 8}, {"frequencies", {0.9, 1.7}}, {"source_powers", {1.0, 0.5}}, {"noise_variance", 0.1},
          {"grid_points", 721}, {"recovery_tol", 1e-8}, {"relative_perturbation", 1e-3}, {"trials", 5},
          {"resolve_grid_points", 2001}, {"prediction_tol", 0.1}, {"superposition_tol", 1e-9}},
         ops::sigproc_subspace},
        {"sigproc", "lms", "LMS mean trajectory and steady covariance against simulation", true,
         {{"step", 0.01}, {"input_covariance", {{1.0, 0.3}, {0.3, 0.5}}}, {"cross_correlation", {0.4, -0.2}},
          {"desired_power", 1.0}, {"initial_weights", {1.0, -1.0}}, {"mean_steps", 400}, {"mean_trials", 2000},
          {"mean_outside_fraction", 0.01}, {"closed_form_tol", 1e-12}, {"steps", 100000}, {"trials", 4},
          {"covariance_tol", 0.1}},
         ops::sigproc_lms},
    };
    return table;
}

const Operation* find_operation(const std::string& module, const std::string& name) {
    for (const Operation& op : operations())
        if (op.module == module && op.name == name) return &op;
    return nullptr;
}

RunReport run_experiment(const ExperimentConfig& config, const RunOptions& options) {
    const Operation* op = find_operation(config.module, config.operation);
    if (!op) throw std::invalid_argument("unknown operation " + config.module + "." + config.operation);
    RunReport report;
    report.id = config.id;
    report.module = config.module;
    report.operation = config.operation;
    report.schema_version = config.schema_version;
    report.parameters = config.params;
    std::uint64_t seed = 0;
    if (op->stochastic) {
        seed = options.seed ? *options.seed : config.seed.value();
        report.seed = seed;
    }
    RunContext ctx{Params(config.params), seed, options.jobs, report};
    const auto t0 = std::chrono::steady_clock::now();
    op->run(ctx);
    report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return report;
}

}  // namespace qlab::experiments
