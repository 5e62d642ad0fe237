#include "qlab/filters/conditional.hpp"
#include "qlab/numkernel/linalg.hpp"
#include "qlab/numkernel/parallel.hpp"
#include "qlab/qdynamics/open_system.hpp"
#include "qlab/qdynamics/phase_space.hpp"

#include <cmath>
#include <string>

namespace qlab::filters {

double expectation(const CMatrix& rho, const CMatrix& op) { return (rho * op).trace().real(); }

namespace {

void finish(BelavkinState& state, CMatrix rho) {
    rho = 0.5 * (rho + rho.adjoint());
    const double tr = rho.trace().real();
    if (!(tr > 0.0) || !std::isfinite(tr)) throw std::runtime_error("belavkin_filter_step: state lost its trace");
    rho /= tr;
    const auto top = rho.rows() - 1;
    const double leak = rho(top, top).real();
    state.max_leakage = std::max(state.max_leakage, leak);
    state.rho = std::move(rho);
    if (leak > kLeakageLimit) {
        throw std::runtime_error("belavkin_filter_step: basis truncation leakage " + std::to_string(leak) +
                                 " exceeds the limit");
    }
}

}  // namespace

BelavkinFilter::BelavkinFilter(const CMatrix& hamiltonian, const CMatrix& lindblad, double dt, double hbar)
    : lindblad_(lindblad), dt_(dt), hbar_(hbar), hamiltonian_(hamiltonian) {
    require_square(hamiltonian, "BelavkinFilter");
    if (lindblad.rows() != hamiltonian.rows() || lindblad.cols() != hamiltonian.cols()) {
        throw std::invalid_argument("BelavkinFilter: H and L must share the basis");
    }
    if (!(dt > 0.0) || !(hbar > 0.0)) throw std::invalid_argument("BelavkinFilter: dt and hbar must be positive");
    const HermitianMatrix h(hamiltonian);
    const SpectralDecomp he = hermitian_eig(h);
    const CVector phases = (he.values * cplx(0.0, -0.5 * dt / hbar)).array().exp();
    half_unitary_ = he.vectors * phases.asDiagonal() * he.vectors.adjoint();

    const double scale = std::max(1.0, lindblad.cwiseAbs().maxCoeff());
    hermitian_ = (lindblad - lindblad.adjoint()).cwiseAbs().maxCoeff() <= 1e-12 * scale;
    jump_ = lindblad.adjoint();
    if (hermitian_) {
        const SpectralDecomp le = hermitian_eig(HermitianMatrix::project(lindblad));
        lindblad_values_ = le.values;
        lindblad_vectors_ = le.vectors;
    } else {
        const auto d = hamiltonian.rows();
        kraus_drift_ = CMatrix::Identity(d, d) -
                       (cplx(0.0, 1.0 / hbar) * hamiltonian + 0.5 * jump_.adjoint() * jump_) * dt;
        jump_square_ = jump_ * jump_;
    }
}

void BelavkinFilter::step(BelavkinState& state, double dy, bool with_innovation) const {
    if (state.rho.rows() != hamiltonian_.rows()) throw std::invalid_argument("BelavkinFilter: state size mismatch");
    if (!std::isfinite(dy)) throw std::invalid_argument("BelavkinFilter: non-finite dY");
    const double predicted = expectation(state.rho, lindblad_ + lindblad_.adjoint());
    if (with_innovation) state.innovations.push_back(dy - predicted * dt_);

    CMatrix rho;
    if (hermitian_) {
        rho = half_unitary_ * state.rho * half_unitary_.adjoint();
        CMatrix local = lindblad_vectors_.adjoint() * rho * lindblad_vectors_;
        const auto d = local.rows();
        if (with_innovation) {
            // exp(L dY - L^2 dt) rho exp(L dY - L^2 dt), exact in the eigenbasis of L.
            const RVector log_factor =
                (lindblad_values_.array() * dy - lindblad_values_.array().square() * dt_).matrix();
            const double shift = log_factor.maxCoeff();
            const RVector factor = (log_factor.array() - shift).exp().matrix();
            for (Eigen::Index j = 0; j < d; ++j)
                for (Eigen::Index i = 0; i < d; ++i) local(i, j) *= factor(i) * factor(j);
        } else {
            for (Eigen::Index j = 0; j < d; ++j)
                for (Eigen::Index i = 0; i < d; ++i) {
                    const double gap = lindblad_values_(i) - lindblad_values_(j);
                    local(i, j) *= std::exp(-0.5 * gap * gap * dt_);
                }
        }
        rho = lindblad_vectors_ * local * lindblad_vectors_.adjoint();
        rho = half_unitary_ * rho * half_unitary_.adjoint();
    } else if (with_innovation) {
        const CMatrix kraus = kraus_drift_ + jump_ * dy + 0.5 * jump_square_ * (dy * dy - dt_);
        rho = kraus * state.rho * kraus.adjoint();
    } else {
        rho = qdynamics::gksl_step(state.rho, qdynamics::GKSLModel{hamiltonian_, {jump_}, hbar_}, dt_);
    }
    state.time += dt_;
    finish(state, std::move(rho));
}

void belavkin_filter_step(BelavkinState& state, double dy, double dt, bool with_innovation) {
    const BelavkinFilter filter(state.hamiltonian, state.lindblad, dt, state.hbar);
    filter.step(state, dy, with_innovation);
}

namespace {

struct CrossCheckSetup {
    CMatrix q, p, h, l;
};

CrossCheckSetup crosscheck_setup(const CrossCheckConfig& c) {
    if (c.basis_dim < 8) throw std::invalid_argument("belavkin crosscheck: basis_dim must be >= 8");
    if (!(c.omega > 0.0) || !(c.horizon > 0.0) || !(c.dt > 0.0)) {
        throw std::invalid_argument("belavkin crosscheck: omega, horizon and dt must be positive");
    }
    const qdynamics::CanonicalPair basis = qdynamics::oscillator_basis(c.basis_dim, 1.0, c.omega, 1.0);
    CrossCheckSetup s;
    s.q = basis.q;
    s.p = basis.p;
    // The number-state energies, exact in the truncated basis.
    s.h = CMatrix::Zero(c.basis_dim, c.basis_dim);
    for (int n = 0; n < c.basis_dim; ++n) s.h(n, n) = c.omega * (n + 0.5);
    s.l = c.coupling * basis.q;
    return s;
}

CMatrix pure(const CVector& psi) { return psi * psi.adjoint(); }

BelavkinState start_state(const CMatrix& rho, const CrossCheckSetup& s) {
    BelavkinState state;
    state.rho = rho;
    state.hamiltonian = s.h;
    state.lindblad = s.l;
    return state;
}

}  // namespace

CrossCheckResult belavkin_kushner_crosscheck(const CrossCheckConfig& config) {
    const CrossCheckSetup s = crosscheck_setup(config);
    const int dim = config.basis_dim;
    const BelavkinFilter filter(s.h, s.l, config.dt);

    BelavkinState truth = start_state(pure(qdynamics::coherent_state(dim, config.true_alpha)), s);
    BelavkinState belavkin = start_state(pure(qdynamics::coherent_state(dim, 0.0)), s);

    // Wigner picture: diffusion a^2 hbar^2 in P, observation 2a Q with unit noise.
    KushnerModel km;
    km.mass = 1.0;
    km.gamma = 0.0;
    km.sigma = std::abs(config.coupling);
    const double w2 = config.omega * config.omega;
    km.force = [w2](double q) { return w2 * q; };
    km.alpha = 2.0 * config.coupling;
    km.beta = 0.0;
    km.noise_scale = 1.0;
    KushnerGrid grid(km, -config.q_half_width, config.q_half_width, config.grid_points, -config.p_half_width,
                     config.p_half_width, config.grid_points);
    grid.set_gaussian(0.0, 0.0, 0.5 / config.omega, 0.5 * config.omega, 0.0);

    const CMatrix q2 = s.q * s.q, p2 = s.p * s.p;
    CrossCheckResult out;
    out.max_leakage = 0.0;
    auto record = [&](double t) {
        const double mq = expectation(belavkin.rho, s.q), mp = expectation(belavkin.rho, s.p);
        const RVector km_mean = grid.mean();
        out.times.push_back(t);
        out.belavkin_q.push_back(mq);
        out.belavkin_p.push_back(mp);
        out.kushner_q.push_back(km_mean(0));
        out.kushner_p.push_back(km_mean(1));
        out.posterior_std_q.push_back(std::sqrt(std::max(0.0, expectation(belavkin.rho, q2) - mq * mq)));
        out.posterior_std_p.push_back(std::sqrt(std::max(0.0, expectation(belavkin.rho, p2) - mp * mp)));
    };
    record(0.0);
    RngStream rng(config.seed, 0);
    const int steps = static_cast<int>(std::llround(config.horizon / config.dt));
    const double sqrt_dt = std::sqrt(config.dt);
    const CMatrix l_sum = s.l + s.l.adjoint();
    for (int k = 1; k <= steps; ++k) {
        const double dy = expectation(truth.rho, l_sum) * config.dt + sqrt_dt * rng.normal();
        filter.step(truth, dy);
        filter.step(belavkin, dy);
        kushner_filter_step(grid, dy, config.dt);
        record(k * config.dt);
    }
    out.max_leakage = std::max(truth.max_leakage, belavkin.max_leakage);

    double sq = 0.0, sp = 0.0, std_q = 0.0, std_p = 0.0;
    const std::size_t n = out.times.size();
    for (std::size_t i = 0; i < n; ++i) {
        sq += std::pow(out.belavkin_q[i] - out.kushner_q[i], 2);
        sp += std::pow(out.belavkin_p[i] - out.kushner_p[i], 2);
        std_q += out.posterior_std_q[i];
        std_p += out.posterior_std_p[i];
    }
    out.rms_q = std::sqrt(sq / n);
    out.rms_p = std::sqrt(sp / n);
    out.mean_std_q = std_q / n;
    out.mean_std_p = std_p / n;
    out.relative = std::max(out.rms_q / out.mean_std_q, out.rms_p / out.mean_std_p);
    return out;
}

EnsembleCheck belavkin_ensemble_check(const CrossCheckConfig& config, int trajectories, int jobs) {
    if (trajectories < 2) throw std::invalid_argument("belavkin_ensemble_check: need at least two trajectories");
    const CrossCheckSetup s = crosscheck_setup(config);
    const int dim = config.basis_dim;
    const BelavkinFilter filter(s.h, s.l, config.dt);
    const CMatrix rho0 = pure(qdynamics::coherent_state(dim, config.true_alpha));
    const int steps = static_cast<int>(std::llround(config.horizon / config.dt));
    const double sqrt_dt = std::sqrt(config.dt);
    const CMatrix l_sum = s.l + s.l.adjoint();
    const std::vector<CMatrix> observables{s.q, s.p, s.q * s.q, s.p * s.p, 0.5 * (s.q * s.p + s.p * s.q)};
    const std::size_t nobs = observables.size();

    RMatrix samples(trajectories, nobs);
    parallel_for(static_cast<std::size_t>(trajectories), jobs, [&](std::size_t t) {
        RngStream rng = RngStream(config.seed, 1).child(t);
        BelavkinState state = start_state(rho0, s);
        for (int k = 0; k < steps; ++k) {
            const double dy = expectation(state.rho, l_sum) * config.dt + sqrt_dt * rng.normal();
            filter.step(state, dy);
        }
        for (std::size_t o = 0; o < nobs; ++o) samples(t, o) = expectation(state.rho, observables[o]);
    });

    const qdynamics::GKSLPropagator gksl(qdynamics::GKSLModel{s.h, {s.l.adjoint()}, 1.0}, config.dt);
    CMatrix rho = rho0;
    for (int k = 0; k < steps; ++k) rho = gksl.step(rho);

    EnsembleCheck out;
    out.trajectories = trajectories;
    out.max_z = 0.0;
    for (std::size_t o = 0; o < nobs; ++o) {
        const double mean = samples.col(o).mean();
        const double var = (samples.col(o).array() - mean).square().sum() / (trajectories - 1);
        const double se = std::sqrt(var / trajectories);
        const double exact = expectation(rho, observables[o]);
        out.gksl.push_back(exact);
        out.ensemble_mean.push_back(mean);
        out.standard_error.push_back(se);
        out.max_z = std::max(out.max_z, std::abs(mean - exact) / std::max(se, 1e-15));
    }
    return out;
}

}  // namespace qlab::filters
