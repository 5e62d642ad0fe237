#include "qlab/filters/linear.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <string>

namespace qlab::filters {

namespace {

RMatrix symmetrize(const RMatrix& m) { return 0.5 * (m + m.transpose()); }

double min_sym_eig(const RMatrix& m) {
    if (m.size() == 0) return kInf;
    Eigen::SelfAdjointEigenSolver<RMatrix> es(symmetrize(m), Eigen::EigenvaluesOnly);
    return es.eigenvalues()(0);
}

}  // namespace

void LinearModel::validate() const {
    const auto n = a.rows();
    if (n == 0 || a.cols() != n) throw std::invalid_argument("LinearModel: A must be square and non-empty");
    if (q.rows() != n || q.cols() != n) throw std::invalid_argument("LinearModel: Q must match A");
    if (c.cols() != n) throw std::invalid_argument("LinearModel: C must have one column per state");
    if (r.rows() != c.rows() || r.cols() != c.rows()) throw std::invalid_argument("LinearModel: R must match C");
    require_finite(a, "LinearModel");
    require_finite(c, "LinearModel");
    require_finite(q, "LinearModel");
    require_finite(r, "LinearModel");
    const double qscale = std::max(1.0, q.cwiseAbs().maxCoeff());
    if ((q - q.transpose()).cwiseAbs().maxCoeff() > 1e-12 * qscale || min_sym_eig(q) < -1e-12 * qscale) {
        throw std::invalid_argument("LinearModel: Q must be symmetric PSD");
    }
    if (r.size() > 0) {
        const double rscale = std::max(1.0, r.cwiseAbs().maxCoeff());
        if ((r - r.transpose()).cwiseAbs().maxCoeff() > 1e-12 * rscale || !(min_sym_eig(r) > 0.0)) {
            throw std::invalid_argument("LinearModel: R must be symmetric PD");
        }
    }
}

RMatrix solve_filter_riccati(const LinearModel& model, double tol, int max_iter) {
    model.validate();
    const auto n = model.states();
    const RMatrix eye = RMatrix::Identity(n, n);
    // Doubling on the dual control form: A_k <- A', G <- C' R^{-1} C, H <- Q.
    RMatrix ak = model.a.transpose();
    RMatrix gk = model.outputs() > 0 ? RMatrix(model.c.transpose() * model.r.llt().solve(model.c))
                                     : RMatrix::Zero(n, n);
    RMatrix hk = model.q;
    for (int it = 0; it < max_iter; ++it) {
        const Eigen::PartialPivLU<RMatrix> lu(eye + gk * hk);
        const RMatrix w_a = lu.solve(ak);
        const RMatrix w_g = lu.solve(gk);
        const RMatrix h_next = symmetrize(hk + ak.transpose() * hk * w_a);
        gk = symmetrize(gk + ak * w_g * ak.transpose());
        ak = ak * w_a;
        const double change = (h_next - hk).cwiseAbs().maxCoeff();
        hk = h_next;
        if (!hk.allFinite()) break;
        if (change <= tol * std::max(1.0, hk.cwiseAbs().maxCoeff())) return hk;
    }
    throw ConvergenceError("solve_filter_riccati: doubling did not converge (is (A, C) detectable?)");
}

double riccati_residual(const LinearModel& model, const RMatrix& p) {
    const RMatrix apa = model.a * p * model.a.transpose();
    RMatrix rhs = apa + model.q;
    if (model.outputs() > 0) {
        const RMatrix s = model.c * p * model.c.transpose() + model.r;
        const RMatrix apc = model.a * p * model.c.transpose();
        rhs -= apc * s.ldlt().solve(apc.transpose());
    }
    return (rhs - p).cwiseAbs().maxCoeff();
}

SteadyKalman steady_kalman(const LinearModel& model) {
    SteadyKalman out;
    out.predicted = solve_filter_riccati(model);
    const auto n = model.states();
    if (model.outputs() > 0) {
        const RMatrix s = model.c * out.predicted * model.c.transpose() + model.r;
        out.gain = s.ldlt().solve(model.c * out.predicted).transpose();
    } else {
        out.gain = RMatrix::Zero(n, 0);
    }
    const RMatrix ikc = RMatrix::Identity(n, n) - out.gain * model.c;
    out.filtered = symmetrize(ikc * out.predicted);
    out.transition = ikc * model.a;
    out.residual = riccati_residual(model, out.predicted);
    return out;
}

namespace {

// Joseph-form measurement update of the covariance.
RMatrix update_covariance(const RMatrix& pred, const RMatrix& gain, const LinearModel& model) {
    if (model.outputs() == 0) return pred;
    const auto n = model.states();
    const RMatrix ikc = RMatrix::Identity(n, n) - gain * model.c;
    return symmetrize(ikc * pred * ikc.transpose() + gain * model.r * gain.transpose());
}

RMatrix gain_for(const RMatrix& pred, const LinearModel& model) {
    if (model.outputs() == 0) return RMatrix::Zero(model.states(), 0);
    const RMatrix s = model.c * pred * model.c.transpose() + model.r;
    return s.ldlt().solve(model.c * pred).transpose();
}

}  // namespace

KalmanRun kalman_filter(const LinearModel& model, const std::vector<RVector>& measurements, const RVector& x0,
                        const RMatrix& p0) {
    model.validate();
    const auto n = model.states();
    if (x0.size() != n || p0.rows() != n || p0.cols() != n) {
        throw std::invalid_argument("kalman_filter: initial state does not match the model");
    }
    KalmanRun run;
    RVector x_pred = x0;
    RMatrix p_pred = p0;
    run.final_change = kInf;
    for (std::size_t k = 0; k < measurements.size(); ++k) {
        const RVector& z = measurements[k];
        if (z.size() != model.outputs()) throw std::invalid_argument("kalman_filter: measurement size mismatch");
        const RMatrix gain = gain_for(p_pred, model);
        const RVector x = model.outputs() > 0 ? RVector(x_pred + gain * (z - model.c * x_pred)) : x_pred;
        const RMatrix p = update_covariance(p_pred, gain, model);
        if (!run.covariances.empty()) run.final_change = (p - run.covariances.back()).cwiseAbs().maxCoeff();
        run.estimates.push_back(x);
        run.covariances.push_back(p);
        run.gains.push_back(gain);
        x_pred = model.a * x;
        p_pred = symmetrize(model.a * p * model.a.transpose() + model.q);
    }
    run.steady = steady_kalman(model);
    return run;
}

int kalman_covariance_settle(const LinearModel& model, const RMatrix& p0, RMatrix& filtered, double tol,
                             int max_steps) {
    model.validate();
    RMatrix p_pred = p0;
    RMatrix prev = update_covariance(p_pred, gain_for(p_pred, model), model);
    for (int step = 1; step <= max_steps; ++step) {
        p_pred = symmetrize(model.a * prev * model.a.transpose() + model.q);
        const RMatrix p = update_covariance(p_pred, gain_for(p_pred, model), model);
        const double change = (p - prev).cwiseAbs().maxCoeff();
        prev = p;
        if (change <= tol) {
            filtered = prev;
            return step;
        }
    }
    throw ConvergenceError("kalman_covariance_settle: no convergence within " + std::to_string(max_steps) +
                           " steps");
}

std::vector<RMatrix> steady_filter_response(const SteadyKalman& steady, const RMatrix& selector, int length) {
    std::vector<RMatrix> h;
    h.reserve(length);
    RMatrix power_gain = steady.gain;
    for (int k = 0; k < length; ++k) {
        h.push_back(selector * power_gain);
        power_gain = steady.transition * power_gain;
    }
    return h;
}

RMatrix discrete_lyapunov(const RMatrix& a, const RMatrix& w) {
    const auto n = a.rows();
    const RMatrix eye = RMatrix::Identity(n * n, n * n);
    RMatrix kron(n * n, n * n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) kron.block(i * n, j * n, n, n) = a(i, j) * a;
    const RVector vec_w = Eigen::Map<const RVector>(w.data(), n * n);
    const RVector x = (eye - kron).partialPivLu().solve(vec_w);
    return symmetrize(Eigen::Map<const RMatrix>(x.data(), n, n));
}

RMatrix continuous_lyapunov(const RMatrix& a, const RMatrix& w) {
    const auto n = a.rows();
    const RMatrix eye = RMatrix::Identity(n, n);
    RMatrix op = RMatrix::Zero(n * n, n * n);
    // vec(A X + X A') = (I kron A + A kron I) vec X
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) {
            op.block(i * n, j * n, n, n) += a(i, j) * eye;
            if (i == j) op.block(i * n, j * n, n, n) += a;
        }
    const RVector vec_w = Eigen::Map<const RVector>(w.data(), n * n);
    const RVector x = op.partialPivLu().solve(-vec_w);
    return symmetrize(Eigen::Map<const RMatrix>(x.data(), n, n));
}

}  // namespace qlab::filters
