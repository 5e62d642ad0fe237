#include "qlab/qhypo/qhypo.hpp"

#include <cmath>

namespace qlab {

double test_cost(const HermitianMatrix& a, const HermitianMatrix& b, const CMatrix& test) {
    const Eigen::Index d = a.dim();
    return (a.matrix() * (CMatrix::Identity(d, d) - test)).trace().real() +
           (b.matrix() * test).trace().real();
}

HelstromResult helstrom_test(const HermitianMatrix& a, const HermitianMatrix& b) {
    if (a.dim() != b.dim()) throw std::invalid_argument("helstrom_test: dimension mismatch");
    const SpectralDecomp eig = hermitian_eig(a - b);
    const double scale = std::max(a.matrix().norm(), b.matrix().norm());
    // exact zeros of A - B belong to T; rounding noise is treated as zero
    const HermitianMatrix t = spectral_projector(eig, -1e-14 * scale);
    return {t, test_cost(a, b, t.matrix())};
}

ChernoffResult chernoff_bound(const DensityMatrix& a, const DensityMatrix& b, double s_tol) {
    if (a.dim() != b.dim()) throw std::invalid_argument("chernoff_bound: dimension mismatch");
    const SpectralDecomp ea = hermitian_eig(a.hermitian());
    const SpectralDecomp eb = hermitian_eig(b.hermitian());
    auto f = [&](double s) {
        const CMatrix pa = s == 1.0 ? CMatrix::Identity(a.dim(), a.dim()) : psd_power(ea, 1.0 - s).matrix();
        const CMatrix pb = s == 0.0 ? CMatrix::Identity(a.dim(), a.dim()) : psd_power(eb, s).matrix();
        return std::max((pa * pb).trace().real(), 0.0);
    };
    if (f(0.5) <= 1e-300) return {0.0, 0.0, true};
    const double g = 0.5 * (std::sqrt(5.0) - 1.0);
    double lo = 0.0, hi = 1.0;
    double x1 = hi - g * (hi - lo), x2 = lo + g * (hi - lo);
    double f1 = f(x1), f2 = f(x2);
    while (hi - lo > s_tol) {
        if (f1 <= f2) {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = f(x2);
        }
    }
    double s_star = 0.5 * (lo + hi);
    double value = f(s_star);
    // the endpoints are candidates too (F(0) = F(1) = 1 for states)
    for (double s : {0.0, 1.0}) {
        const double v = f(s);
        if (v < value) {
            value = v;
            s_star = s;
        }
    }
    return {s_star, value, false};
}

ClassicalEmbedding classical_embedding(const DensityMatrix& rho, const DensityMatrix& sigma) {
    if (rho.dim() != sigma.dim()) throw std::invalid_argument("classical_embedding: dimension mismatch");
    const SpectralDecomp er = hermitian_eig(rho.hermitian());
    const SpectralDecomp es = hermitian_eig(sigma.hermitian());
    const RMatrix overlap = (er.vectors.adjoint() * es.vectors).cwiseAbs2();
    const Eigen::Index d = rho.dim();
    ClassicalEmbedding out{RMatrix(d, d), RMatrix(d, d)};
    for (Eigen::Index i = 0; i < d; ++i)
        for (Eigen::Index j = 0; j < d; ++j) {
            out.p(i, j) = std::max(er.values(i), 0.0) * overlap(i, j);
            out.q(i, j) = std::max(es.values(j), 0.0) * overlap(i, j);
        }
    return out;
}

DetectionBound detection_error_lower_bound(const DensityMatrix& rho, const DensityMatrix& sigma) {
    const ClassicalEmbedding e = classical_embedding(rho, sigma);
    const double sum_min = e.p.cwiseMin(e.q).sum();
    return {0.25 * sum_min, 0.5 * sum_min};
}

RenyiPinching renyi_pinching_monotonicity(const DensityMatrix& a, const DensityMatrix& b, double t,
                                          const PVM& pvm) {
    if (!(t > 0.0 && t < 1.0)) throw std::invalid_argument("renyi_pinching_monotonicity: t outside (0,1)");
    const DensityMatrix ka = pinch(a, pvm), kb = pinch(b, pvm);
    return {renyi_trace(t, a.hermitian(), b.hermitian()), renyi_trace(t, ka.hermitian(), kb.hermitian())};
}

}  // namespace qlab
