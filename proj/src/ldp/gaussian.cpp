#include "qlab/ldp/ldp.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <cmath>

namespace qlab::ldp {

namespace {

void validate(const GaussianPathModel& m) {
    if (m.covariance.rows() == 0 || m.covariance.rows() != m.covariance.cols()) {
        throw std::invalid_argument("GaussianPathModel: covariance must be square");
    }
    if ((m.covariance - m.covariance.transpose()).cwiseAbs().maxCoeff() > 1e-12 * m.covariance.cwiseAbs().maxCoeff()) {
        throw std::invalid_argument("GaussianPathModel: covariance must be symmetric");
    }
}

}  // namespace

double gaussian_path_rate(const GaussianPathModel& model, const RVector& chi) {
    validate(model);
    if (chi.size() != model.covariance.rows()) throw std::invalid_argument("gaussian_path_rate: path has the wrong length");
    Eigen::LLT<RMatrix> llt(model.covariance);
    if (llt.info() != Eigen::Success) throw std::invalid_argument("gaussian_path_rate: covariance is not positive definite");
    return 0.5 * chi.dot(llt.solve(chi));
}

BallMinimum min_rate_over_ball(const GaussianPathModel& model) {
    validate(model);
    if (!(model.threshold >= 0.0)) throw std::invalid_argument("min_rate_over_ball: threshold must be nonnegative");
    Eigen::SelfAdjointEigenSolver<RMatrix> es(model.covariance);
    if (es.eigenvalues()(0) <= 0.0) throw std::invalid_argument("min_rate_over_ball: covariance is not positive definite");
    const Eigen::Index top = model.covariance.rows() - 1;
    const double lmax = es.eigenvalues()(top);
    return {model.threshold / (2.0 * lmax), std::sqrt(model.threshold) * es.eigenvectors().col(top), lmax};
}

}  // namespace qlab::ldp
