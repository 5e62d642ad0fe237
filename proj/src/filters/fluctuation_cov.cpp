#include "qlab/filters/linear.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <vector>

namespace qlab::filters {

namespace {

struct Rule {
    std::vector<double> nodes, weights;
};

// Golub-Welsch on [-1, 1].
Rule gauss_legendre(int n) {
    RVector diag = RVector::Zero(n);
    RVector sub(n - 1);
    for (int k = 1; k < n; ++k) sub(k - 1) = k / std::sqrt(4.0 * k * k - 1.0);
    Eigen::SelfAdjointEigenSolver<RMatrix> es;
    es.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
    Rule r;
    for (int k = 0; k < n; ++k) {
        r.nodes.push_back(es.eigenvalues()(k));
        r.weights.push_back(2.0 * es.eigenvectors()(0, k) * es.eigenvectors()(0, k));
    }
    return r;
}

// Panels [0, h0], [h0, 2h0], [2h0, 4h0], ... up to the horizon.
Rule geometric_panels(double first, double horizon, int per_panel) {
    const Rule base = gauss_legendre(per_panel);
    Rule out;
    double lo = 0.0, hi = std::min(first, horizon);
    while (lo < horizon) {
        const double half = 0.5 * (hi - lo), mid = 0.5 * (hi + lo);
        for (int k = 0; k < per_panel; ++k) {
            out.nodes.push_back(mid + half * base.nodes[k]);
            out.weights.push_back(half * base.weights[k]);
        }
        lo = hi;
        hi = std::min(2.0 * hi, horizon);
    }
    return out;
}

}  // namespace

FluctuationCovariance linearized_fluctuation_covariance(const RMatrix& a, const NoiseCorrelation& noise,
                                                        int nodes_per_panel, double horizon) {
    const auto r = a.rows();
    if (r == 0 || a.cols() != r) throw std::invalid_argument("linearized_fluctuation_covariance: A must be square");
    require_finite(a, "linearized_fluctuation_covariance");
    if (nodes_per_panel < 2) throw std::invalid_argument("linearized_fluctuation_covariance: need >= 2 nodes");

    const Eigen::EigenSolver<RMatrix> es(a);
    const CVector eig = es.eigenvalues();
    const CMatrix v = es.eigenvectors();
    const Eigen::JacobiSVD<CMatrix> svd(v);
    const double cond = svd.singularValues()(0) / svd.singularValues()(r - 1);
    if (!(cond < 1e10)) throw std::invalid_argument("linearized_fluctuation_covariance: A is not diagonalizable");
    // The decay rates are lambda_k = -eig_k.
    double slowest = kInf, fastest = 0.0;
    for (Eigen::Index k = 0; k < r; ++k) {
        slowest = std::min(slowest, -eig(k).real());
        fastest = std::max(fastest, std::abs(eig(k)));
    }
    if (!(slowest > 0.0)) throw std::invalid_argument("linearized_fluctuation_covariance: A must be stable");

    FluctuationCovariance out;
    out.covariance = RMatrix::Zero(r, r);
    out.smooth_trace = 0.0;
    double sup = noise.sup_norm;

    if (noise.smooth) {
        const double span = horizon > 0.0 ? horizon : 40.0 / slowest;
        const Rule rule = geometric_panels(1.0 / fastest, span, nodes_per_panel);
        const CMatrix v_inv = v.inverse();
        auto phi = [&](double t) -> RMatrix {
            const CVector decay = (eig * t).array().exp();
            return (v * decay.asDiagonal() * v_inv).real();
        };
        const std::size_t n = rule.nodes.size();
        std::vector<RMatrix> phi_at(n);
        for (std::size_t i = 0; i < n; ++i) phi_at[i] = phi(rule.nodes[i]);
        const bool estimate_sup = !(sup > 0.0);
        if (estimate_sup) sup = noise.smooth(0.0).jacobiSvd().singularValues()(0);

        // t1 = u + tau, t2 = u with tau >= 0 and the mirrored half; Phi(u + tau) = Phi(tau) Phi(u).
        RMatrix acc = RMatrix::Zero(r, r);
        for (std::size_t i = 0; i < n; ++i) {
            const RMatrix r_fwd = noise.smooth(rule.nodes[i]);
            const RMatrix r_bwd = noise.smooth(-rule.nodes[i]);
            if (r_fwd.rows() != r || r_fwd.cols() != r || r_bwd.rows() != r || r_bwd.cols() != r) {
                throw std::invalid_argument("linearized_fluctuation_covariance: R_w has the wrong shape");
            }
            if (estimate_sup) {
                sup = std::max({sup, r_fwd.jacobiSvd().singularValues()(0), r_bwd.jacobiSvd().singularValues()(0)});
            }
            RMatrix inner_fwd = RMatrix::Zero(r, r), inner_bwd = RMatrix::Zero(r, r);
            for (std::size_t j = 0; j < n; ++j) {
                inner_fwd.noalias() += rule.weights[j] * (phi_at[j] * r_fwd * phi_at[j].transpose());
                inner_bwd.noalias() += rule.weights[j] * (phi_at[j] * r_bwd * phi_at[j].transpose());
            }
            acc += rule.weights[i] * (phi_at[i] * inner_fwd + inner_bwd * phi_at[i].transpose());
        }
        out.covariance += acc;
        out.smooth_trace = acc.trace();
    }
    if (noise.white_intensity.size() > 0) {
        if (noise.white_intensity.rows() != r || noise.white_intensity.cols() != r) {
            throw std::invalid_argument("linearized_fluctuation_covariance: white intensity has the wrong shape");
        }
        out.covariance += continuous_lyapunov(a, noise.white_intensity);
    }
    out.trace = out.covariance.trace();

    double modal = 0.0;
    for (Eigen::Index k = 0; k < r; ++k)
        for (Eigen::Index m = 0; m < r; ++m) modal += 1.0 / (-(eig(k) + eig(m)).real());
    out.modal_bound = sup * modal;
    out.bound = 2.0 * sup * static_cast<double>(r * r) / slowest;
    out.bound_holds = out.smooth_trace <= out.bound;
    return out;
}

}  // namespace qlab::filters
