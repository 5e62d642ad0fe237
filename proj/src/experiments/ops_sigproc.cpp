#include "ops.hpp"

#include "qlab/sigproc/sigproc.hpp"

#include <cmath>

namespace qlab::experiments::ops {

using namespace sigproc;

namespace {

CMatrix random_hermitian(Eigen::Index n, RngStream& rng) {
    CMatrix a(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) a(i, j) = cplx(rng.normal(), rng.normal());
    return 0.5 * (a + a.adjoint());
}

CMatrix random_complex(Eigen::Index n, RngStream& rng) {
    CMatrix a(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) a(i, j) = cplx(rng.normal(), rng.normal());
    return a;
}

RMatrix matrix_param(const Params& p, const std::string& key) {
    const auto rows = p.json().at(key).get<std::vector<std::vector<double>>>();
    RMatrix m(static_cast<Eigen::Index>(rows.size()), rows.empty() ? 0 : static_cast<Eigen::Index>(rows[0].size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].size() != static_cast<std::size_t>(m.cols())) throw std::invalid_argument(key + ": ragged matrix");
        for (std::size_t j = 0; j < rows[i].size(); ++j) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    }
    return m;
}

RVector vector_param(const Params& p, const std::string& key) {
    const std::vector<double> v = p.numbers(key);
    return Eigen::Map<const RVector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace

void sigproc_subspace(RunContext& ctx) {
    const Params& p = ctx.params;
    RunReport& rep = ctx.report;
    SubspaceModel model;
    model.sensors = p.integer("sensors");
    model.frequencies = vector_param(p, "frequencies");
    model.source_covariance = vector_param(p, "source_powers").cast<cplx>().asDiagonal();
    model.noise_variance = p.number("noise_variance");
    const int sources = static_cast<int>(model.sources());
    const Eigen::Index n = model.sensors;

    const CMatrix r = model.covariance();
    const CMatrix r1 = model.shifted_covariance();
    const CMatrix z = model.shift_structure();
    const MusicSpectrum ms = music_spectrum(r, sources, RVector::LinSpaced(p.integer("grid_points"), 0.0, kPi));
    const EspritResult es = esprit_solve(model);
    double music_err = 0, esprit_err = 0;
    for (int k = 0; k < sources; ++k) {
        music_err = std::max(music_err, k < ms.peaks.size() ? std::abs(ms.peaks(k) - model.frequencies(k)) : kInf);
        esprit_err = std::max(esprit_err, std::abs(es.gamma(k) - std::polar(1.0, model.frequencies(k))));
    }
    if (ms.peaks.size() != sources) music_err = kInf;
    rep.at_most("music_recovery_error", music_err, p.number("recovery_tol"));
    rep.at_most("esprit_recovery_error", esprit_err, p.number("recovery_tol"));

    // First-order predictions against re-solving the perturbed problem.
    RngStream rng(ctx.seed, 0);
    const double scale = p.number("relative_perturbation") * r.norm();
    const RVector resolve_grid = RVector::LinSpaced(p.integer("resolve_grid_points"), 0.0, kPi);
    Table& t = rep.table("perturbation", {"trial", "method", "source", "predicted", "actual", "relative_error"});
    double music_rel = 0, esprit_rel = 0;
    const RVector base_gamma_arg = model.frequencies;
    const CVector base_gamma = esprit_solve(r, r1, sources, z).gamma;
    for (int trial = 0; trial < p.integer("trials"); ++trial) {
        CMatrix dr = random_hermitian(n, rng), dr1 = random_complex(n, rng);
        dr *= scale / dr.norm();
        dr1 *= scale / dr1.norm();
        const RVector pred_w = music_perturbation(r, sources, model.frequencies, dr).delta_omega;
        const RVector act_w = music_spectrum(r + dr, sources, resolve_grid).peaks - base_gamma_arg;
        const CVector pred_g = esprit_perturbation(r, r1, sources, z, dr, dr1);
        const CVector act_g = esprit_solve(r + dr, r1 + dr1, sources, z).gamma - base_gamma;
        for (int k = 0; k < sources; ++k) {
            const double em = std::abs(pred_w(k) - act_w(k)) / std::abs(act_w(k));
            const double ee = std::abs(pred_g(k) - act_g(k)) / std::abs(act_g(k));
            t.add({double(trial), "music", double(k), pred_w(k), act_w(k), em});
            t.add({double(trial), "esprit", double(k), std::abs(pred_g(k)), std::abs(act_g(k)), ee});
            music_rel = std::max(music_rel, em);
            esprit_rel = std::max(esprit_rel, ee);
        }
    }
    rep.at_most("music_prediction_relative_error", music_rel, p.number("prediction_tol"));
    rep.at_most("esprit_prediction_relative_error", esprit_rel, p.number("prediction_tol"));

    // Superposition of the first-order maps.
    CMatrix a = random_hermitian(n, rng), a1 = random_complex(n, rng);
    CMatrix b = random_hermitian(n, rng), b1 = random_complex(n, rng);
    a *= scale / a.norm();
    b *= scale / b.norm();
    a1 *= scale / a1.norm();
    b1 *= scale / b1.norm();
    const RVector wa = music_perturbation(r, sources, model.frequencies, a).delta_omega;
    const RVector wb = music_perturbation(r, sources, model.frequencies, b).delta_omega;
    const RVector wab = music_perturbation(r, sources, model.frequencies, a + b).delta_omega;
    const CVector ga = esprit_perturbation(r, r1, sources, z, a, a1);
    const CVector gb = esprit_perturbation(r, r1, sources, z, b, b1);
    const CVector gab = esprit_perturbation(r, r1, sources, z, a + b, a1 + b1);
    rep.at_most("music_superposition_error", (wab - wa - wb).cwiseAbs().maxCoeff(), p.number("superposition_tol"));
    rep.at_most("esprit_superposition_error", (gab - ga - gb).cwiseAbs().maxCoeff(), p.number("superposition_tol"));
}

void sigproc_lms(RunContext& ctx) {
    const Params& p = ctx.params;
    RunReport& rep = ctx.report;
    const LMSConfig cfg{p.number("step"), matrix_param(p, "input_covariance"), vector_param(p, "cross_correlation"),
                        p.number("desired_power")};
    const RVector start = vector_param(p, "initial_weights");
    const int steps = p.integer("steps");
    const Eigen::Index n = start.size();

    // Closed-form mean trajectory against the mean recursion itself.
    const int mean_steps = p.integer("mean_steps");
    const LMSAnalysis early = lms_analyze(cfg, start, mean_steps);
    RVector lambda = start;
    double closed = 0;
    const RMatrix contraction = RMatrix::Identity(n, n) - 2.0 * cfg.step * cfg.input_covariance;
    for (int k = 0; k <= mean_steps; ++k) {
        closed = std::max(closed, (early.mean[static_cast<std::size_t>(k)] - lambda).cwiseAbs().maxCoeff());
        lambda = contraction * lambda + 2.0 * cfg.step * cfg.cross_correlation;
    }
    rep.at_most("mean_closed_form_error", closed, p.number("closed_form_tol"));

    const LMSSimulation ms = lms_simulate(cfg, start, mean_steps, p.integer("mean_trials"), ctx.seed, ctx.jobs);
    Table& mt = rep.table("mean_trajectory", {"step", "component", "closed_form", "simulated", "std_error"});
    int outside = 0;
    for (int k = 0; k <= mean_steps; ++k)
        for (Eigen::Index i = 0; i < n; ++i) {
            const double a = early.mean[static_cast<std::size_t>(k)](i), s = ms.mean[static_cast<std::size_t>(k)](i);
            const double se = ms.mean_std_error[static_cast<std::size_t>(k)](i);
            if (k % 10 == 0) mt.add({double(k), double(i), a, s, se});
            outside += std::abs(s - a) > 3.0 * se + 1e-15;
        }
    const double allowed = p.number("mean_outside_fraction") * (mean_steps + 1) * n;
    rep.metric("mean_outside_3se", outside);
    rep.at_most("mean_outside_3se_count", outside, allowed);

    // Steady covariance fixed point against the long simulation.
    const LMSAnalysis an = lms_analyze(cfg, start, 0);
    const LMSSimulation sim = lms_simulate(cfg, start, steps, p.integer("trials"), ctx.seed + 1, ctx.jobs);
    Table& ct = rep.table("steady_covariance", {"row", "col", "fixed_point", "simulated"});
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j)
            ct.add({double(i), double(j), an.steady_covariance(i, j), sim.steady_covariance(i, j)});
    rep.metric("mean_spectral_radius", an.mean_radius);
    rep.metric("covariance_spectral_radius", an.covariance_radius);
    rep.holds("converges", an.converges);
    rep.at_most("steady_covariance_relative_error",
                (sim.steady_covariance - an.steady_covariance).norm() / an.steady_covariance.norm(),
                p.number("covariance_tol"));
}

}  // namespace qlab::experiments::ops
