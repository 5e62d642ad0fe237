#include "qlab/filters/nonlinear.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <string>

namespace qlab::filters {

namespace {

RMatrix central_jacobian(const StateSpaceModel::Map& map, const RVector& x, const RVector& u) {
    const RVector base = map(x, u);
    RMatrix jac(base.size(), x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        const double step = 1e-6 * std::max(1.0, std::abs(x(i)));
        RVector hi = x, lo = x;
        hi(i) += step;
        lo(i) -= step;
        jac.col(i) = (map(hi, u) - map(lo, u)) / (2.0 * step);
    }
    return jac;
}

void check_estimate(const StateSpaceModel& model, const GaussianEstimate& est, const char* where) {
    if (est.mean.size() != model.states() || est.covariance.rows() != model.states() ||
        est.covariance.cols() != model.states()) {
        throw std::invalid_argument(std::string(where) + ": estimate does not match the model");
    }
}

}  // namespace

void StateSpaceModel::validate() const {
    if (!drift || !observation) throw std::invalid_argument("StateSpaceModel: drift and observation are required");
    LinearModel shape{RMatrix::Identity(states(), states()), RMatrix::Zero(outputs(), states()), q, r};
    shape.validate();
}

RMatrix StateSpaceModel::drift_derivative(const RVector& x, const RVector& u) const {
    return drift_jacobian ? drift_jacobian(x, u) : central_jacobian(drift, x, u);
}

RMatrix StateSpaceModel::observation_derivative(const RVector& x, const RVector& u) const {
    return observation_jacobian ? observation_jacobian(x, u) : central_jacobian(observation, x, u);
}

StateSpaceModel StateSpaceModel::from_linear(const LinearModel& lin) {
    lin.validate();
    StateSpaceModel m;
    const RMatrix a = lin.a, c = lin.c;
    m.drift = [a](const RVector& x, const RVector&) -> RVector { return a * x; };
    m.observation = [c](const RVector& x, const RVector&) -> RVector { return c * x; };
    m.drift_jacobian = [a](const RVector&, const RVector&) { return a; };
    m.observation_jacobian = [c](const RVector&, const RVector&) { return c; };
    m.q = lin.q;
    m.r = lin.r;
    return m;
}

RMatrix project_psd(const RMatrix& p) {
    const Eigen::SelfAdjointEigenSolver<RMatrix> es(0.5 * (p + p.transpose()));
    const RVector clipped = es.eigenvalues().cwiseMax(0.0);
    return es.eigenvectors() * clipped.asDiagonal() * es.eigenvectors().transpose();
}

RMatrix psd_sqrt(const RMatrix& p) {
    const Eigen::SelfAdjointEigenSolver<RMatrix> es(0.5 * (p + p.transpose()));
    const RVector root = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    return es.eigenvectors() * root.asDiagonal() * es.eigenvectors().transpose();
}

GaussianEstimate ekf_step(const StateSpaceModel& model, const GaussianEstimate& state, const RVector& z,
                          const RVector& u, const RVector& u_next) {
    check_estimate(model, state, "ekf_step");
    if (z.size() != model.outputs()) throw std::invalid_argument("ekf_step: measurement size mismatch");
    const RMatrix f = model.drift_derivative(state.mean, u);
    const RVector x_pred = model.drift(state.mean, u);
    const RMatrix p_pred = f * state.covariance * f.transpose() + model.q;
    const RMatrix h = model.observation_derivative(x_pred, u_next);
    const RMatrix s = h * p_pred * h.transpose() + model.r;
    GaussianEstimate out;
    out.gain = s.ldlt().solve(h * p_pred).transpose();
    out.mean = x_pred + out.gain * (z - model.observation(x_pred, u_next));
    const RMatrix ikh = RMatrix::Identity(model.states(), model.states()) - out.gain * h;
    out.covariance = project_psd(ikh * p_pred * ikh.transpose() + out.gain * model.r * out.gain.transpose());
    return out;
}

void ukf_step(const StateSpaceModel& model, UKFState& state, const RVector& z, const RVector& u,
              const RVector& u_next) {
    check_estimate(model, state.estimate, "ukf_step");
    if (z.size() != model.outputs()) throw std::invalid_argument("ukf_step: measurement size mismatch");
    if (state.sigma_points < 2) throw std::invalid_argument("ukf_step: need at least two sigma points");
    const int count = state.sigma_points;
    const auto nx = model.states();
    const auto nz = model.outputs();

    // Prediction through f.
    const RMatrix root = psd_sqrt(state.estimate.covariance);
    RMatrix images(nx, count);
    for (int k = 0; k < count; ++k) {
        RVector xi(nx);
        for (Eigen::Index i = 0; i < nx; ++i) xi(i) = state.rng.normal();
        images.col(k) = model.drift(state.estimate.mean + root * xi, u);
    }
    const RVector x_pred = images.rowwise().mean();
    const RMatrix dev_x = images.colwise() - x_pred;
    const RMatrix p_pred = project_psd(dev_x * dev_x.transpose() / count + model.q);

    // Measurement prediction through h with one draw shared by both factors of Sigma_XY.
    const RMatrix root_pred = psd_sqrt(p_pred);
    RMatrix offsets(nx, count), outputs(nz, count);
    for (int k = 0; k < count; ++k) {
        RVector eta(nx);
        for (Eigen::Index i = 0; i < nx; ++i) eta(i) = state.rng.normal();
        offsets.col(k) = root_pred * eta;
        outputs.col(k) = model.observation(x_pred + offsets.col(k), u_next);
    }
    const RVector z_pred = outputs.rowwise().mean();
    const RMatrix dev_z = outputs.colwise() - z_pred;
    const RMatrix sigma_xy = offsets * dev_z.transpose() / count;
    const RMatrix sigma_yy = dev_z * dev_z.transpose() / count + model.r;
    const Eigen::LDLT<RMatrix> ldlt(sigma_yy);

    GaussianEstimate& est = state.estimate;
    est.gain = ldlt.solve(sigma_xy.transpose()).transpose();
    est.mean = x_pred + est.gain * (z - z_pred);
    est.covariance = project_psd(p_pred - est.gain * sigma_xy.transpose());
    state.predicted_mean = x_pred;
    state.predicted_covariance = p_pred;
}

}  // namespace qlab::filters
