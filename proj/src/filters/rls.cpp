#include "qlab/filters/linear.hpp"

#include <Eigen/Eigenvalues>

#include <string>

namespace qlab::filters {

namespace {

void check_stream(const std::vector<RMatrix>& regressors, const std::vector<RVector>& observations) {
    if (regressors.empty() || regressors.size() != observations.size()) {
        throw std::invalid_argument("rls: need matching, non-empty regressor and observation streams");
    }
    const auto dim = regressors.front().cols();
    for (std::size_t n = 0; n < regressors.size(); ++n) {
        if (regressors[n].cols() != dim || regressors[n].rows() != observations[n].size()) {
            throw std::invalid_argument("rls: sample " + std::to_string(n) + " has inconsistent shapes");
        }
    }
}

}  // namespace

RVector batch_least_squares(const std::vector<RMatrix>& regressors, const std::vector<RVector>& observations,
                            int count, double ridge) {
    check_stream(regressors, observations);
    const auto dim = regressors.front().cols();
    RMatrix info = ridge * RMatrix::Identity(dim, dim);
    RVector rhs = RVector::Zero(dim);
    for (int n = 0; n < count; ++n) {
        info.noalias() += regressors[n].transpose() * regressors[n];
        rhs.noalias() += regressors[n].transpose() * observations[n];
    }
    return info.ldlt().solve(rhs);
}

RlsResult rls_identify(const std::vector<RMatrix>& regressors, const std::vector<RVector>& observations,
                       double ridge) {
    check_stream(regressors, observations);
    if (ridge < 0.0) throw std::invalid_argument("rls_identify: ridge must be nonnegative");
    const auto dim = regressors.front().cols();
    const int total = static_cast<int>(regressors.size());

    RlsResult out;
    RMatrix inv_info;
    RVector theta;
    if (ridge > 0.0) {
        out.start = 0;
        inv_info = RMatrix::Identity(dim, dim) / ridge;
        theta = RVector::Zero(dim);
    } else {
        // Absorb samples until sum H'H is comfortably positive definite.
        RMatrix info = RMatrix::Zero(dim, dim);
        RVector rhs = RVector::Zero(dim);
        int n = 0;
        bool ready = false;
        while (n < total && !ready) {
            info.noalias() += regressors[n].transpose() * regressors[n];
            rhs.noalias() += regressors[n].transpose() * observations[n];
            ++n;
            const Eigen::SelfAdjointEigenSolver<RMatrix> es(info, Eigen::EigenvaluesOnly);
            ready = es.eigenvalues()(0) > 1e-8 * std::max(1.0, es.eigenvalues()(dim - 1));
        }
        if (!ready) throw std::invalid_argument("rls_identify: sum H'H never becomes positive definite");
        out.start = n;
        inv_info = info.ldlt().solve(RMatrix::Identity(dim, dim));
        inv_info = 0.5 * (inv_info + inv_info.transpose());
        theta = inv_info * rhs;
    }
    out.estimates.push_back(theta);
    for (int n = out.start; n < total; ++n) {
        const RMatrix& h = regressors[n];
        const RMatrix ph = inv_info * h.transpose();
        const RMatrix s = RMatrix::Identity(h.rows(), h.rows()) + h * ph;
        // K = R^{-1} H' (I + H R^{-1} H')^{-1}; R^{-1} <- R^{-1} - K H R^{-1}.
        const RMatrix gain = s.ldlt().solve(ph.transpose()).transpose();
        theta += gain * (observations[n] - h * theta);
        inv_info -= gain * ph.transpose();
        inv_info = 0.5 * (inv_info + inv_info.transpose());
        out.estimates.push_back(theta);
        out.gains.push_back(gain);
    }
    out.inverse_information = inv_info;
    return out;
}

}  // namespace qlab::filters
