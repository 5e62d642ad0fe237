#include "ops.hpp"

#include "qlab/numkernel/random.hpp"
#include "qlab/qdynamics/qdynamics.hpp"

#include <cmath>

namespace qlab::experiments::ops {

using namespace qdynamics;

namespace {

std::shared_ptr<const PhaseGrid> make_grid(int nq, double dq, int np, double hbar, Potential pot) {
    return std::make_shared<const PhaseGrid>(nq, dq, np, hbar, 1.0, std::move(pot));
}

}  // namespace

void qdyn_wigner(RunContext& ctx) {
    const Params& p = ctx.params;
    RunReport& rep = ctx.report;

    // Marginals of random mixed states against the position diagonal and the
    // directly summed momentum density.
    {
        const int nq = p.integer("marginal_nq");
        const auto grid = make_grid(nq, p.number("marginal_dq"), p.integer("marginal_np"), p.number("marginal_hbar"),
                                    Potential::harmonic(1.0, 1.0));
        double worst = 0, mass = 0;
        for (int s = 0; s < p.integer("marginal_states"); ++s) {
            RngStream rng = RngStream(ctx.seed, 0).child(static_cast<std::uint64_t>(s));
            const CMatrix kernel = random::density(rng, nq).matrix() / grid->dq();
            const WignerField w = wigner_from_density(kernel, grid);
            worst = std::max(worst, (w.q_marginal() - kernel.diagonal().real()).cwiseAbs().maxCoeff());
            worst = std::max(worst, (w.p_marginal() - momentum_density(kernel, *grid)).cwiseAbs().maxCoeff());
            mass = std::max(mass, std::abs(w.total_mass() - 1.0));
        }
        rep.metric("marginal_mass_error", mass);
        rep.at_most("marginal_max_error", worst, p.number("marginal_tol"));
    }

    // Quadratic potential: the correction series vanishes, so the quantum and
    // classical steppers agree bit for bit.
    {
        const std::vector<double> coeffs = p.numbers("quadratic_coefficients");
        const auto grid = make_grid(64, 0.15, 64, p.number("quadratic_hbar"), Potential::polynomial(coeffs));
        WignerField wc = gaussian_wigner(grid, 0.5, -0.3, 0.7, 0.8), wq = wc;
        const double dt = 0.5 * liouville_max_dt(*grid, {2, nullptr});
        double diff = 0;
        for (int s = 0; s < p.integer("quadratic_steps"); ++s) {
            wc = liouville_step_quantum(wc, dt, {0, nullptr});
            wq = liouville_step_quantum(wq, dt, {2, nullptr});
            diff = std::max(diff, (wc.values - wq.values).cwiseAbs().maxCoeff());
        }
        rep.at_most("quadratic_quantum_classical_difference", diff, 0.0);
    }

    // Quartic potential: L1 size of the quantum correction against hbar.
    {
        const std::vector<double> hbars = p.numbers("quartic_hbars");
        const std::vector<double> coeffs = p.numbers("quartic_coefficients");
        const double horizon = p.number("quartic_horizon");
        const double box = p.number("quartic_box");
        const int np = p.integer("quartic_np");
        Table& t = rep.table("hbar_scaling", {"hbar", "dq", "nq", "l1_correction", "mass_drift"});
        RVector lx(static_cast<Eigen::Index>(hbars.size())), ly(lx.size());
        double drift = 0;
        for (std::size_t i = 0; i < hbars.size(); ++i) {
            const double hbar = hbars[i];
            const double dq = p.number("quartic_dq_per_hbar") * hbar;
            const int nq = static_cast<int>(std::lround(box / dq));
            const auto grid = make_grid(nq, dq, np, hbar, Potential::polynomial(coeffs));
            const WignerField w0 = gaussian_wigner(grid, 1.0, 0.0, 0.5, 0.5);
            const double cap = 0.9 * std::min(liouville_max_dt(*grid, {2, nullptr}), 0.002);
            const int steps = static_cast<int>(std::ceil(horizon / cap));
            WignerField wq = w0, wc = w0;
            double d = 0;
            for (int s = 0; s < steps; ++s) {
                const double before = wq.total_mass();
                wq = liouville_step_quantum(wq, horizon / steps, {2, nullptr});
                wc = liouville_step_quantum(wc, horizon / steps, {0, nullptr});
                d = std::max(d, std::abs(wq.total_mass() - before));
            }
            const double l1 = (wq.values - wc.values).cwiseAbs().sum() * grid->dq() * grid->dp();
            t.add({hbar, dq, double(nq), l1, d});
            lx(static_cast<Eigen::Index>(i)) = std::log(hbar);
            ly(static_cast<Eigen::Index>(i)) = std::log(l1);
            drift = std::max(drift, d);
        }
        const double mx = lx.mean(), my = ly.mean();
        const double slope = ((lx.array() - mx) * (ly.array() - my)).sum() / (lx.array() - mx).square().sum();
        rep.metric("quartic_loglog_slope", slope);
        // Outflow through the truncated box; reported, not gated.
        rep.metric("quartic_mass_drift_per_step", drift);
        rep.at_most("quartic_slope_error", std::abs(slope - p.number("slope_target")), p.number("slope_tol"));
    }
}

void qdyn_fluctuation(RunContext& ctx) {
    const Params& p = ctx.params;
    RunReport& rep = ctx.report;
    const double m = p.number("mass"), gamma = p.number("gamma"), beta = p.number("beta");
    const double tol = p.number("residual_tol");
    const double matched = std::sqrt(2 * m * gamma / beta);
    const std::pair<const char*, Potential> potentials[] = {
        {"harmonic", Potential::harmonic(m, p.number("harmonic_omega"))},
        {"quartic", Potential::polynomial(p.numbers("quartic_coefficients"))}};
    Table& t = rep.table("fluctuation_dissipation", {"potential", "sigma_scale", "sigma2", "residual"});
    for (const auto& [name, u] : potentials) {
        const FluctuationReport at = fluctuation_dissipation_check(m, gamma, matched, beta, u);
        t.add({name, 1.0, matched * matched, at.residual});
        rep.at_most(std::string(name) + "_matched_residual", at.residual, tol);
        double smallest_mismatch = kInf;
        for (double scale : p.numbers("mismatch_scales")) {
            const double r = fluctuation_dissipation_check(m, gamma, scale * matched, beta, u).residual;
            t.add({name, scale, scale * scale * matched * matched, r});
            smallest_mismatch = std::min(smallest_mismatch, r);
        }
        // The converse: any other noise level leaves a residual above the tolerance.
        rep.at_least(std::string(name) + "_mismatched_min_residual", smallest_mismatch, tol);
    }

    const int dim = p.integer("basis_dim");
    const CanonicalPair basis = oscillator_basis(dim, 1.0, 1.0);
    const CVector psi = coherent_state(dim, cplx(p.number("coherent_re"), p.number("coherent_im")));
    const cplx a(p.number("jump_q_re"), p.number("jump_q_im")), b(p.number("jump_p_re"), p.number("jump_p_im"));
    const HeisenbergReport h = heisenberg_moment_check(basis, 1.0, Potential::harmonic(1.0, 1.0), a, b,
                                                       psi * psi.adjoint(), p.number("t_end"), p.number("dt"));
    const double expected = 2.0 * (std::conj(a) * b).imag();
    rep.metric("expected_velocity_damping", expected);
    rep.metric("fitted_velocity_damping", h.fitted_velocity_damping);
    rep.metric("heisenberg_min_eigenvalue", h.min_eigenvalue);
    rep.at_most("heisenberg_moment_residual", h.residual_rms, p.number("damping_tol"));
    rep.at_most("damping_rate_error", std::abs(h.fitted_velocity_damping - expected), p.number("damping_tol"));
}

void qdyn_qnn(RunContext& ctx) {
    const Params& p = ctx.params;
    RunReport& rep = ctx.report;
    QNNReferenceTask task = qnn_reference_task(p.number("alpha"), p.number("beta"));
    const QNNTrace trace = qnn_track(task.state, task.target, task.horizon, task.dt, p.integer("record_every"));
    Table& t = rep.table("tracking", {"time", "l1_error", "norm_error"});
    double norm = 0;
    for (std::size_t i = 0; i < trace.times.size(); ++i) {
        t.add({trace.times[i], trace.l1_error[i], trace.norm_error[i]});
        norm = std::max(norm, trace.norm_error[i]);
    }
    rep.metric("initial_l1_error", trace.l1_error.front());
    rep.metric("max_weight", trace.max_weight);
    rep.holds("weights_bounded", !trace.diverged);
    rep.at_most("norm_max_error", norm, p.number("norm_tol"));
    rep.at_most("terminal_l1_error", trace.l1_error.back(), p.number("l1_limit"));

    const double slope = p.number("wkb_ramp_slope");
    const WkbReport w = wkb_amplitude_check(p.number("wkb_energy"), [slope](double x) { return slope * x; },
                                            p.number("wkb_lower"), p.number("wkb_upper"));
    rep.metric("wkb_validity", w.validity);
    rep.holds("wkb_window_valid", w.valid);
    rep.at_most("wkb_amplitude_deviation", w.max_deviation, p.number("wkb_tol"));
}

}  // namespace qlab::experiments::ops
