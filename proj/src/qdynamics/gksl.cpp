#include "qlab/qdynamics/open_system.hpp"

#include "qlab/numkernel/linalg.hpp"

#include <cmath>
#include <limits>

namespace qlab::qdynamics {

namespace {

CMatrix matrix_of(const CMatrix& q, const std::function<double(double)>& f) {
    return matrix_function(HermitianMatrix::project(q), f, -1.0).matrix();
}

CMatrix hermitize(const CMatrix& a) { return 0.5 * (a + a.adjoint()); }

double expectation(const CMatrix& rho, const CMatrix& op) { return (rho * op).trace().real(); }

// Angular wavenumbers of an n-point periodic grid, Nyquist mode set to zero for odd operators.
RVector wavenumbers(int n, double dq, bool keep_nyquist) {
    RVector k(n);
    for (int i = 0; i < n; ++i) {
        int idx = i <= n / 2 ? i : i - n;
        k(i) = 2.0 * kPi * idx / (n * dq);
        if (n % 2 == 0 && i == n / 2 && !keep_nyquist) k(i) = 0.0;
    }
    return k;
}

// F^{-1} diag(symbol) F for the unitary DFT.
CMatrix spectral_operator(const RVector& symbol) {
    const int n = static_cast<int>(symbol.size());
    CMatrix f(n, n);
    for (int a = 0; a < n; ++a) {
        for (int b = 0; b < n; ++b) {
            f(a, b) = std::polar(1.0 / std::sqrt(static_cast<double>(n)),
                                 -2.0 * kPi * static_cast<double>((static_cast<long>(a) * b) % n) / n);
        }
    }
    return f.adjoint() * symbol.cast<cplx>().asDiagonal() * f;
}

}  // namespace

CanonicalPair oscillator_basis(int dim, double mass, double omega, double hbar) {
    if (dim < 2 || !(mass > 0.0) || !(omega > 0.0) || !(hbar > 0.0)) {
        throw std::invalid_argument("oscillator_basis: need dim >= 2 and positive mass, omega, hbar");
    }
    CMatrix lower = CMatrix::Zero(dim, dim);
    for (int n = 1; n < dim; ++n) lower(n - 1, n) = std::sqrt(static_cast<double>(n));
    const CMatrix raise = lower.adjoint();
    CanonicalPair out;
    out.hbar = hbar;
    out.q = std::sqrt(hbar / (2.0 * mass * omega)) * (lower + raise);
    out.p = cplx(0.0, std::sqrt(hbar * mass * omega / 2.0)) * (raise - lower);
    return out;
}

CanonicalPair position_grid_basis(int nq, double dq, double hbar, double q_center) {
    if (nq < 2 || !(dq > 0.0) || !(hbar > 0.0)) {
        throw std::invalid_argument("position_grid_basis: need nq >= 2 and positive dq, hbar");
    }
    CanonicalPair out;
    out.hbar = hbar;
    RVector q(nq);
    for (int j = 0; j < nq; ++j) q(j) = q_center + (j - 0.5 * (nq - 1)) * dq;
    out.q = q.cast<cplx>().asDiagonal();
    out.p = hermitize(spectral_operator(hbar * wavenumbers(nq, dq, false)));
    return out;
}

CMatrix hamiltonian(const CanonicalPair& basis, double mass, const Potential& potential) {
    if (!(mass > 0.0)) throw std::invalid_argument("hamiltonian: mass must be positive");
    return hermitize(basis.p * basis.p / (2.0 * mass) + matrix_of(basis.q, potential.value));
}

CMatrix grid_hamiltonian(int nq, double dq, double hbar, double mass, const Potential& potential, double q_center) {
    if (nq < 2 || !(dq > 0.0) || !(hbar > 0.0) || !(mass > 0.0)) {
        throw std::invalid_argument("grid_hamiltonian: need nq >= 2 and positive dq, hbar, mass");
    }
    const RVector k = wavenumbers(nq, dq, true);
    CMatrix h = spectral_operator((hbar * hbar / (2.0 * mass)) * k.cwiseProduct(k));
    for (int j = 0; j < nq; ++j) h(j, j) += potential.value(q_center + (j - 0.5 * (nq - 1)) * dq);
    return hermitize(h);
}

CMatrix linear_jump(const CanonicalPair& basis, cplx a, cplx b) { return a * basis.q + b * basis.p; }

GKSLPropagator::GKSLPropagator(GKSLModel model, double dt) : model_(std::move(model)), dt_(dt) {
    require_square(model_.hamiltonian, "GKSLPropagator");
    if (!(dt > 0.0) || !(model_.hbar > 0.0)) throw std::invalid_argument("GKSLPropagator: dt and hbar must be positive");
    const auto dim = model_.hamiltonian.rows();
    damping_ = CMatrix::Zero(dim, dim);
    for (const CMatrix& l : model_.jumps) {
        if (l.rows() != dim || l.cols() != dim) throw std::invalid_argument("GKSLPropagator: jump dimension mismatch");
        damping_ += l.adjoint() * l;
    }
    damping_ = hermitize(damping_);
    if (!model_.jumps.empty()) {
        const double rate = hermitian_eig(HermitianMatrix::project(damping_)).values.maxCoeff();
        if (dt * rate > 2.5) {
            throw std::invalid_argument("GKSLPropagator: dt exceeds the dissipator stability bound 2.5 / rate");
        }
    }
    const SpectralDecomp eig = hermitian_eig(HermitianMatrix(model_.hamiltonian, 1e-10));
    CVector phase(dim);
    for (Eigen::Index i = 0; i < dim; ++i) phase(i) = std::polar(1.0, -eig.values(i) * dt / (2.0 * model_.hbar));
    half_unitary_ = eig.vectors * phase.asDiagonal() * eig.vectors.adjoint();
}

CMatrix GKSLPropagator::dissipator(const CMatrix& rho) const {
    CMatrix out = -0.5 * (damping_ * rho + rho * damping_);
    for (const CMatrix& l : model_.jumps) out += l * rho * l.adjoint();
    return out;
}

CMatrix GKSLPropagator::step(const CMatrix& rho) const {
    if (rho.rows() != half_unitary_.rows() || rho.cols() != half_unitary_.cols()) {
        throw std::invalid_argument("GKSLPropagator::step: state dimension mismatch");
    }
    CMatrix x = half_unitary_ * rho * half_unitary_.adjoint();
    if (!model_.jumps.empty()) {
        const CMatrix k1 = dissipator(x);
        const CMatrix k2 = dissipator(x + 0.5 * dt_ * k1);
        const CMatrix k3 = dissipator(x + 0.5 * dt_ * k2);
        const CMatrix k4 = dissipator(x + dt_ * k3);
        x += (dt_ / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    return hermitize(half_unitary_ * x * half_unitary_.adjoint());
}

CMatrix gksl_step(const CMatrix& rho, const GKSLModel& model, double dt) { return GKSLPropagator(model, dt).step(rho); }

double min_eigenvalue(const CMatrix& rho) {
    return hermitian_eig(HermitianMatrix::project(rho)).values.minCoeff();
}

MomentTrajectory gksl_moments(const CMatrix& rho0, const GKSLModel& model, const CMatrix& q, const CMatrix& p,
                              const CMatrix& force, double t_end, double dt, int record_every) {
    if (record_every < 1) throw std::invalid_argument("gksl_moments: record_every must be >= 1");
    const int steps = static_cast<int>(std::llround(t_end / dt));
    if (steps < 1 || std::abs(steps * dt - t_end) > 1e-9 * std::max(1.0, t_end)) {
        throw std::invalid_argument("gksl_moments: t_end must be a positive multiple of dt");
    }
    const GKSLPropagator prop(model, dt);
    MomentTrajectory traj;
    CMatrix rho = rho0;
    const double trace0 = rho.trace().real();
    auto record = [&](int s) {
        traj.times.push_back(s * dt);
        traj.mean_q.push_back(expectation(rho, q));
        traj.mean_p.push_back(expectation(rho, p));
        traj.mean_force.push_back(expectation(rho, force));
        traj.min_eigenvalue = std::min(traj.min_eigenvalue, min_eigenvalue(rho));
        traj.max_trace_drift = std::max(traj.max_trace_drift, std::abs(rho.trace().real() - trace0));
    };
    record(0);
    for (int s = 1; s <= steps; ++s) {
        rho = prop.step(rho);
        if (s % record_every == 0 || s == steps) record(s);
    }
    return traj;
}

HeisenbergReport heisenberg_moment_check(const CanonicalPair& basis, double mass, const Potential& potential,
                                         cplx a, cplx b, const CMatrix& rho0, double t_end, double dt, double tol) {
    GKSLModel model{hamiltonian(basis, mass, potential), {linear_jump(basis, a, b)}, basis.hbar};
    const CMatrix force = matrix_of(basis.q, [&](double x) { return potential.derivative(1, x, 1e-3); });
    const MomentTrajectory traj = gksl_moments(rho0, model, basis.q, basis.p, force, t_end, dt, 1);

    HeisenbergReport rep{};
    const double c = basis.hbar * (std::conj(a) * b).imag();
    rep.damping_coefficient = c;
    rep.min_eigenvalue = traj.min_eigenvalue;

    const std::size_t n = traj.times.size();
    double sum = 0.0;
    for (std::size_t i = 1; i + 1 < n; ++i) {
        const double dq = (traj.mean_q[i + 1] - traj.mean_q[i - 1]) / (2.0 * dt);
        const double dp = (traj.mean_p[i + 1] - traj.mean_p[i - 1]) / (2.0 * dt);
        const double rq = dq - (traj.mean_p[i] / mass - c * traj.mean_q[i]);
        const double rp = dp - (-traj.mean_force[i] - c * traj.mean_p[i]);
        sum += 0.5 * (rq * rq + rp * rp);
    }
    rep.residual_rms = n > 2 ? std::sqrt(sum / static_cast<double>(n - 2)) : 0.0;

    // Linear force U'(Q) = f0 + k Q: the means obey a closed linear ODE.
    bool linear = true;
    for (double x : {-2.0, -0.5, 0.0, 0.7, 2.0}) {
        if (std::abs(potential.derivative(3, x, 1e-2)) > 1e-12) linear = false;
    }
    rep.ode_rms = std::numeric_limits<double>::quiet_NaN();
    rep.fitted_velocity_damping = std::numeric_limits<double>::quiet_NaN();
    if (linear) {
        const double f0 = potential.derivative(1, 0.0, 1e-3);
        const double k = potential.derivative(2, 0.0, 1e-3);
        auto rhs = [&](const Eigen::Vector2d& x) {
            return Eigen::Vector2d(x(1) / mass - c * x(0), -f0 - k * x(0) - c * x(1));
        };
        Eigen::Vector2d x(traj.mean_q[0], traj.mean_p[0]);
        double ode_sum = 0.0;
        for (std::size_t i = 1; i < n; ++i) {
            const Eigen::Vector2d k1 = rhs(x);
            const Eigen::Vector2d k2 = rhs(x + 0.5 * dt * k1);
            const Eigen::Vector2d k3 = rhs(x + 0.5 * dt * k2);
            const Eigen::Vector2d k4 = rhs(x + dt * k3);
            x += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            const double eq = x(0) - traj.mean_q[i];
            const double ep = x(1) - traj.mean_p[i];
            ode_sum += 0.5 * (eq * eq + ep * ep);
        }
        rep.ode_rms = std::sqrt(ode_sum / static_cast<double>(n - 1));

        // Affine one-step map X_{i+1} = M X_i + v by least squares; its
        // determinant is exp(-2c dt), so -log det M / dt is the velocity damping.
        RMatrix design(n - 1, 3), target(n - 1, 2);
        for (std::size_t i = 0; i + 1 < n; ++i) {
            design.row(i) << traj.mean_q[i], traj.mean_p[i], 1.0;
            target.row(i) << traj.mean_q[i + 1], traj.mean_p[i + 1];
        }
        const RMatrix coef = design.colPivHouseholderQr().solve(target);
        const Eigen::Matrix2d m = coef.topRows(2).transpose();
        rep.fitted_velocity_damping = -std::log(m.determinant()) / dt;
    }
    rep.pass = rep.residual_rms <= tol && (!linear || rep.ode_rms <= tol) &&
               rep.min_eigenvalue >= kPositivityFlag;
    return rep;
}

CVector coherent_state(int dim, cplx alpha) {
    if (dim < 1) throw std::invalid_argument("coherent_state: dim must be positive");
    CVector out(dim);
    cplx term = 1.0;
    for (int n = 0; n < dim; ++n) {
        if (n > 0) term *= alpha / std::sqrt(static_cast<double>(n));
        out(n) = term;
    }
    return out / out.norm();
}

}  // namespace qlab::qdynamics
