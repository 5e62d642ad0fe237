#include "ops.hpp"

#include "qlab/filters/filters.hpp"
#include "qlab/ldp/ldp.hpp"

#include <algorithm>
#include <cmath>

namespace qlab::experiments::ops {

using namespace filters;

void filter_crosscheck(RunContext& ctx) {
    const Params& p = ctx.params;
    RunReport& rep = ctx.report;
    CrossCheckConfig cfg;
    cfg.basis_dim = p.integer("basis_dim");
    cfg.omega = p.number("omega");
    cfg.coupling = p.number("coupling");
    cfg.true_alpha = p.number("true_alpha");
    cfg.horizon = p.number("horizon");
    cfg.dt = p.number("dt");
    cfg.grid_points = p.integer("grid_points");
    cfg.seed = ctx.seed;
    const CrossCheckResult res = belavkin_kushner_crosscheck(cfg);
    Table& t = rep.table("posterior_means",
                         {"time", "belavkin_q", "kushner_q", "belavkin_p", "kushner_p", "posterior_std_q", "posterior_std_p"});
    for (std::size_t i = 0; i < res.times.size(); ++i) {
        t.add({res.times[i], res.belavkin_q[i], res.kushner_q[i], res.belavkin_p[i], res.kushner_p[i],
               res.posterior_std_q[i], res.posterior_std_p[i]});
    }
    rep.metric("rms_q", res.rms_q);
    rep.metric("rms_p", res.rms_p);
    rep.metric("mean_posterior_std_q", res.mean_std_q);
    rep.metric("mean_posterior_std_p", res.mean_std_p);
    rep.at_most("basis_leakage", res.max_leakage, kLeakageLimit);
    rep.at_most("relative_rms_discrepancy", res.relative, p.number("rms_limit"));

    CrossCheckConfig ens = cfg;
    ens.basis_dim = p.integer("ensemble_basis_dim");
    ens.horizon = p.number("ensemble_horizon");
    ens.dt = p.number("ensemble_dt");
    ens.seed = ctx.seed + 1;
    const EnsembleCheck ec = belavkin_ensemble_check(ens, p.integer("ensemble_trajectories"), ctx.jobs);
    Table& et = rep.table("ensemble", {"observable", "gksl", "ensemble_mean", "standard_error"});
    const char* names[] = {"Q", "P", "Q2", "P2", "QP_sym"};
    for (std::size_t i = 0; i < ec.gksl.size(); ++i) et.add({names[i], ec.gksl[i], ec.ensemble_mean[i], ec.standard_error[i]});
    rep.at_most("ensemble_max_z", ec.max_z, p.number("z_limit"));
}

namespace {

LinearModel ar2_model(double a1, double a2, double var_w, double var_v) {
    LinearModel m;
    m.a = RMatrix{{-a1, -a2}, {1.0, 0.0}};
    m.c = RMatrix{{1.0, 0.0}};
    m.q = RMatrix{{var_w, 0.0}, {0.0, 0.0}};
    m.r = RMatrix{{var_v}};
    return m;
}

}  // namespace

void filter_linear(RunContext& ctx) {
    const Params& p = ctx.params;
    RunReport& rep = ctx.report;
    const LinearModel lin = ar2_model(p.number("ar_a1"), p.number("ar_a2"), p.number("process_var"), p.number("noise_var"));
    const SteadyKalman steady = steady_kalman(lin);

    // Steady Kalman impulse response against the causal Wiener filter.
    const int length = p.integer("wiener_length");
    const SpectralPair pair{lin, RMatrix{{1.0, 0.0}}};
    const WienerFilter wiener = causal_wiener(pair, length);
    const std::vector<RMatrix> kalman = steady_filter_response(steady, pair.selector, length);
    Table& wt = rep.table("wiener_vs_kalman", {"lag", "kalman", "wiener"});
    double worst = 0;
    for (int k = 0; k < length; ++k) {
        wt.add({double(k), kalman[k](0, 0), wiener.coefficients[k](0, 0)});
        worst = std::max(worst, std::abs(kalman[k](0, 0) - wiener.coefficients[k](0, 0)));
    }
    rep.metric("riccati_residual", steady.residual);
    rep.at_most("kalman_wiener_max_gap", worst, p.number("wiener_tol"));

    // Monte Carlo sigma-point gain against the steady Kalman gain.
    const StateSpaceModel model = StateSpaceModel::from_linear(lin);
    UKFState state;
    state.estimate = {RVector::Zero(2), steady.filtered, {}};
    state.sigma_points = p.integer("sigma_points");
    state.rng = RngStream(ctx.seed, 0);
    RngStream data(ctx.seed, 1);
    RMatrix gain_sum = RMatrix::Zero(2, 1);
    const int steps = p.integer("ukf_steps"), burn = p.integer("ukf_burn");
    for (int n = 0; n < steps; ++n) {
        ukf_step(model, state, RVector::Constant(1, data.normal()));
        if (n >= burn) gain_sum += state.estimate.gain;
    }
    const RMatrix mean_gain = gain_sum / (steps - burn);
    rep.at_most("ukf_gain_relative_error", (mean_gain - steady.gain).norm() / steady.gain.norm(), p.number("ukf_tol"));

    // Recursive least squares against the batch solution at every sample count.
    RngStream rng(ctx.seed, 2);
    const int dim = p.integer("rls_dim"), total = p.integer("rls_samples");
    const double noise = p.number("rls_noise");
    RVector theta(dim);
    for (int j = 0; j < dim; ++j) theta(j) = rng.normal();
    std::vector<RMatrix> hs;
    std::vector<RVector> xs;
    for (int n = 0; n < total; ++n) {
        RMatrix h(2, dim);
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < dim; ++j) h(i, j) = rng.normal();
        hs.push_back(h);
        xs.push_back(h * theta + noise * RVector{{rng.normal(), rng.normal()}});
    }
    const RlsResult rls = rls_identify(hs, xs);
    double rls_gap = 0;
    for (std::size_t i = 0; i < rls.estimates.size(); ++i) {
        const RVector batch = batch_least_squares(hs, xs, rls.start + static_cast<int>(i));
        rls_gap = std::max(rls_gap, (rls.estimates[i] - batch).cwiseAbs().maxCoeff());
    }
    rep.at_most("rls_batch_max_gap", rls_gap, p.number("rls_tol"));
}

void filter_controller(RunContext& ctx) {
    const Params& p = ctx.params;
    RunReport& rep = ctx.report;

    // Scalar loop: lambda_max of R_chi grows with |g0 + g1 k g2|, so the
    // optimum is k = -g0 / (g1 g2).
    ControllerDesign d;
    d.g0 = RMatrix{{p.number("g0")}};
    d.g1 = RMatrix{{p.number("g1")}};
    d.g2 = RMatrix{{p.number("g2")}};
    d.g3 = RMatrix{{1.0}};
    d.noise_covariance = RMatrix{{p.number("noise_var")}};
    const double spacing = p.number("grid_spacing");
    std::vector<RMatrix> grid;
    for (int i = 0; i < p.integer("grid_count"); ++i) grid.push_back(RMatrix{{p.number("grid_start") + spacing * i}});
    const ControllerResult res = ldp_ukf_controller(d, grid, p.integer("scalar_horizon"), p.number("scalar_threshold"));
    Table& gt = rep.table("scalar_gains", {"gain", "spectral_radius", "lambda_max", "min_rate"});
    for (const GainScore& s : res.table) gt.add({s.gain(0, 0), s.spectral_radius, s.lambda_max, s.min_rate});
    const double optimum = -p.number("g0") / (p.number("g1") * p.number("g2"));
    const double best = res.table[res.best].gain(0, 0);
    rep.metric("closed_form_optimum", optimum);
    rep.metric("grid_optimum", best);
    rep.at_most("optimum_gap", std::abs(best - optimum), spacing);

    // Linearized nonlinear model: Monte Carlo exceedance frequencies of three
    // stable gains must rank like their lambda_max.
    StateSpaceModel model;
    model.drift = [](const RVector& x, const RVector&) -> RVector { return RVector{{0.95 * x(0) + 0.1 * std::sin(x(0))}}; };
    model.observation = [](const RVector& x, const RVector&) -> RVector { return RVector{{x(0) + 0.1 * x(0) * x(0)}}; };
    model.q = RMatrix{{p.number("model_q")}};
    model.r = RMatrix{{p.number("model_r")}};
    const ControllerDesign lin = linearize_controller(model, RVector::Zero(1), RVector(), p.integer("sigma_points"));
    std::vector<RMatrix> gains;
    for (double g : p.numbers("model_gains")) gains.push_back(RMatrix{{g}});
    const int horizon = p.integer("model_horizon");
    const ControllerResult lr = ldp_ukf_controller(lin, gains, horizon, p.number("model_threshold"));
    std::vector<std::size_t> stable;
    for (std::size_t i = 0; i < lr.table.size(); ++i)
        if (std::isfinite(lr.table[i].lambda_max)) stable.push_back(i);
    if (stable.size() < 3) throw std::invalid_argument("filter.controller: need at least three stable gains");
    std::sort(stable.begin(), stable.end(),
              [&](std::size_t a, std::size_t b) { return lr.table[a].lambda_max < lr.table[b].lambda_max; });
    const std::size_t picks[] = {stable.front(), stable[stable.size() / 2], stable.back()};
    Table& rt = rep.table("ranking", {"gain", "lambda_max", "min_rate", "exceedance_frequency"});
    std::vector<double> lambda, freq;
    for (std::size_t i : picks) {
        const GainScore& s = lr.table[i];
        const double f = chi_exceedance_frequency(lin, s.gain, horizon, p.number("mc_threshold"), 1.0,
                                                  p.integer("mc_trials"), ctx.seed);
        rt.add({s.gain(0, 0), s.lambda_max, s.min_rate, f});
        lambda.push_back(s.lambda_max);
        freq.push_back(f);
    }
    int inversions = 0;
    for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b)
            if (lambda[a] < lambda[b] && freq[a] > freq[b]) ++inversions;
    double rate_gap = 0;
    for (const GainScore& s : lr.table) {
        if (!std::isfinite(s.lambda_max)) continue;
        const ldp::BallMinimum ball = ldp::min_rate_over_ball({chi_covariance(lin, s.gain, horizon), p.number("model_threshold")});
        rate_gap = std::max(rate_gap, std::abs(ball.rate - s.min_rate));
    }
    rep.metric("ldp_rate_consistency", rate_gap);
    rep.at_most("ranking_inversions", inversions, 0);
}

}  // namespace qlab::experiments::ops
