#include "qlab/filters/conditional.hpp"
#include "qlab/qdynamics/phase_space.hpp"

#include <cmath>
#include <string>

namespace qlab::filters {

KushnerGrid::KushnerGrid(KushnerModel model, double q_lo, double q_hi, int nq, double p_lo, double p_hi, int np)
    : model_(std::move(model)) {
    if (nq < 3 || np < 3 || !(q_hi > q_lo) || !(p_hi > p_lo)) {
        throw std::invalid_argument("KushnerGrid: need at least 3 cells per axis on non-empty intervals");
    }
    if (!(model_.mass > 0.0) || model_.gamma < 0.0 || model_.sigma < 0.0 || !(model_.noise_scale > 0.0)) {
        throw std::invalid_argument("KushnerGrid: need mass > 0, gamma >= 0, sigma >= 0, noise_scale > 0");
    }
    if (!model_.force) throw std::invalid_argument("KushnerGrid: U' is required");
    dq_ = (q_hi - q_lo) / nq;
    dp_ = (p_hi - p_lo) / np;
    q_.resize(nq);
    p_.resize(np);
    force_.resize(nq);
    for (int i = 0; i < nq; ++i) {
        q_(i) = q_lo + (i + 0.5) * dq_;
        force_(i) = model_.force(q_(i));
    }
    for (int j = 0; j < np; ++j) p_(j) = p_lo + (j + 0.5) * dp_;
    require_finite(force_, "KushnerGrid");
    density = RMatrix::Zero(nq, np);
}

void KushnerGrid::set_gaussian(double mean_q, double mean_p, double var_q, double var_p, double cov_qp) {
    const double det = var_q * var_p - cov_qp * cov_qp;
    if (!(var_q > 0.0) || !(det > 0.0)) throw std::invalid_argument("KushnerGrid: covariance must be PD");
    for (int i = 0; i < nq(); ++i)
        for (int j = 0; j < np(); ++j) {
            const double dq = q_(i) - mean_q, dp = p_(j) - mean_p;
            density(i, j) = std::exp(-0.5 * (var_p * dq * dq - 2.0 * cov_qp * dq * dp + var_q * dp * dp) / det);
        }
    density /= mass();
}

RVector KushnerGrid::mean() const {
    const double area = dq_ * dp_;
    RVector m(2);
    m(0) = q_.dot(density.rowwise().sum()) * area;
    m(1) = p_.dot(density.colwise().sum().transpose()) * area;
    return m;
}

RMatrix KushnerGrid::covariance() const {
    const RVector m = mean();
    const double area = dq_ * dp_;
    const RVector dq = q_.array() - m(0);
    const RVector dp = p_.array() - m(1);
    RMatrix c(2, 2);
    c(0, 0) = dq.cwiseAbs2().dot(density.rowwise().sum()) * area;
    c(1, 1) = dp.cwiseAbs2().dot(density.colwise().sum().transpose()) * area;
    c(0, 1) = c(1, 0) = dq.dot(density * dp) * area;
    return c;
}

double KushnerGrid::max_dt() const {
    const double vq = p_.cwiseAbs().maxCoeff() / model_.mass;
    const double vp = force_.cwiseAbs().maxCoeff() + model_.gamma * p_.cwiseAbs().maxCoeff();
    const double diffusion = model_.sigma * model_.sigma / (dp_ * dp_);
    return 1.0 / (vq / dq_ + vp / dp_ + diffusion);
}

RMatrix KushnerGrid::fokker_planck_rhs(const RMatrix& p) const {
    const int n_q = nq(), n_p = np();
    RMatrix out = RMatrix::Zero(n_q, n_p);
    // Q-direction transport with velocity P/m; faces between rows i and i+1.
    for (int i = 0; i + 1 < n_q; ++i) {
        for (int j = 0; j < n_p; ++j) {
            const double flux = p_(j) / model_.mass * 0.5 * (p(i, j) + p(i + 1, j));
            out(i, j) -= flux / dq_;
            out(i + 1, j) += flux / dq_;
        }
    }
    // P-direction: flux -(U' + gamma P) p - (sigma^2/2) dp/dP; faces between columns.
    const double half_var = 0.5 * model_.sigma * model_.sigma;
    for (int j = 0; j + 1 < n_p; ++j) {
        const double p_face = 0.5 * (p_(j) + p_(j + 1));
        for (int i = 0; i < n_q; ++i) {
            const double drift = force_(i) + model_.gamma * p_face;
            const double flux = -drift * 0.5 * (p(i, j) + p(i, j + 1)) - half_var * (p(i, j + 1) - p(i, j)) / dp_;
            out(i, j) -= flux / dp_;
            out(i, j + 1) += flux / dp_;
        }
    }
    return out;
}

KushnerStepInfo kushner_filter_step(KushnerGrid& grid, double dy, double dt) {
    if (!(dt > 0.0) || !std::isfinite(dy)) throw std::invalid_argument("kushner_filter_step: bad dt or dY");
    if (dt > grid.max_dt()) {
        throw qdynamics::CflError("kushner_filter_step: dt exceeds the Fokker-Planck stability bound " +
                                  std::to_string(grid.max_dt()));
    }
    RMatrix& p = grid.density;
    const RMatrix k1 = grid.fokker_planck_rhs(p);
    const RMatrix k2 = grid.fokker_planck_rhs(p + 0.5 * dt * k1);
    const RMatrix k3 = grid.fokker_planck_rhs(p + 0.5 * dt * k2);
    const RMatrix k4 = grid.fokker_planck_rhs(p + dt * k3);
    p += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);

    KushnerStepInfo info{};
    const double area = grid.dq() * grid.dp();
    info.clipped_mass = -p.cwiseMin(0.0).sum() * area;
    p = p.cwiseMax(0.0);

    const KushnerModel& m = grid.model();
    if (m.alpha != 0.0 || m.beta != 0.0) {
        const double s2 = m.noise_scale * m.noise_scale;
        RMatrix log_like(grid.nq(), grid.np());
        for (int i = 0; i < grid.nq(); ++i)
            for (int j = 0; j < grid.np(); ++j) {
                const double h = m.alpha * grid.q_points()(i) + m.beta * grid.p_points()(j);
                log_like(i, j) = (h * dy - 0.5 * h * h * dt) / s2;
            }
        const double shift = log_like.maxCoeff();
        p = p.cwiseProduct((log_like.array() - shift).exp().matrix());
    }
    info.mass_before_normalization = grid.mass();
    if (!(info.mass_before_normalization > 0.0)) throw std::runtime_error("kushner_filter_step: density vanished");
    if (m.alpha != 0.0 || m.beta != 0.0 || info.clipped_mass > 0.0) p /= info.mass_before_normalization;
    return info;
}

void kalman_bucy_step(const LinearDiffusion& model, KalmanBucyState& state, const RVector& dy, double dt) {
    const auto n = model.a.rows();
    if (state.mean.size() != n || state.covariance.rows() != n || dy.size() != model.c.rows()) {
        throw std::invalid_argument("kalman_bucy_step: shapes do not match the model");
    }
    const RMatrix noise_inv = model.noise.ldlt().solve(RMatrix::Identity(model.noise.rows(), model.noise.rows()));
    const RMatrix gain = state.covariance * model.c.transpose() * noise_inv;
    state.mean += model.a * state.mean * dt + gain * (dy - model.c * state.mean * dt);
    auto riccati = [&](const RMatrix& p) -> RMatrix {
        return model.a * p + p * model.a.transpose() + model.diffusion -
               p * model.c.transpose() * noise_inv * model.c * p;
    };
    const RMatrix& p = state.covariance;
    const RMatrix k1 = riccati(p);
    const RMatrix k2 = riccati(p + 0.5 * dt * k1);
    const RMatrix k3 = riccati(p + 0.5 * dt * k2);
    const RMatrix k4 = riccati(p + dt * k3);
    RMatrix next = p + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    state.covariance = 0.5 * (next + next.transpose());
}

}  // namespace qlab::filters
