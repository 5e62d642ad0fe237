#include "qlab/numkernel/parallel.hpp"
#include "qlab/sigproc/sigproc.hpp"

#include <cmath>
#include <stdexcept>

namespace qlab::sigproc {

namespace {

// Row g holds w[n] e^{-j w_g n} / sqrt(N).
CMatrix analysis_matrix(const PeriodogramPlan& plan) {
    const RVector w = plan.taps();
    const int n = plan.block_length;
    CMatrix a(plan.omegas.size(), n);
    for (Eigen::Index g = 0; g < plan.omegas.size(); ++g)
        for (int k = 0; k < n; ++k) a(g, k) = w(k) * std::polar(1.0, -plan.omegas(g) * k) / std::sqrt(double(n));
    return a;
}

}  // namespace

RVector PeriodogramPlan::taps() const {
    if (block_length < 1) throw std::invalid_argument("PeriodogramPlan: block length must be positive");
    if (window.size() == 0) return RVector::Ones(block_length);
    if (window.size() != block_length) throw std::invalid_argument("PeriodogramPlan: window length must equal N");
    return window;
}

RVector periodogram(const PeriodogramPlan& plan, const RVector& block) {
    if (block.size() != plan.block_length) throw std::invalid_argument("periodogram: block length mismatch");
    return (analysis_matrix(plan) * block.cast<cplx>()).cwiseAbs2();
}

PeriodogramStats periodogram_stats(const PeriodogramPlan& plan, const RVector& acf, int trials, std::uint64_t seed,
                                   int jobs) {
    const int n = plan.block_length;
    if (acf.size() < n) throw std::invalid_argument("periodogram_stats: need R[0..N-1]");
    if (trials < 2) throw std::invalid_argument("periodogram_stats: need at least two trials");
    RMatrix toeplitz(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) toeplitz(i, j) = acf(std::abs(i - j));
    const CMatrix a = analysis_matrix(plan);
    const auto g = a.rows();

    PeriodogramStats out;
    out.trials = trials;
    const CMatrix ta = toeplitz.cast<cplx>() * a.transpose();  // columns T a_g
    out.expected_mean.resize(g);
    out.expected_variance.resize(g);
    for (Eigen::Index k = 0; k < g; ++k) {
        const double s = (a.row(k).conjugate() * ta.col(k))(0, 0).real();
        const cplx c = (a.row(k) * ta.col(k))(0, 0);
        out.expected_mean(k) = s;
        out.expected_variance(k) = s * s + std::norm(c);
    }

    // Exact synthesis through the Cholesky factor; a zero process gives a zero factor.
    RMatrix root = RMatrix::Zero(n, n);
    if (acf.cwiseAbs().maxCoeff() > 0.0) {
        const Eigen::LDLT<RMatrix> ldlt(toeplitz);
        if (ldlt.info() != Eigen::Success || (ldlt.vectorD().array() < -1e-12 * acf(0)).any()) {
            throw std::invalid_argument("periodogram_stats: autocorrelation is not positive semidefinite");
        }
        const RVector d = ldlt.vectorD().cwiseMax(0.0).cwiseSqrt();
        root = ldlt.transpositionsP().transpose() * RMatrix(ldlt.matrixL()) * d.asDiagonal();
    }

    RMatrix samples(g, trials);
    parallel_for(static_cast<std::size_t>(trials), jobs, [&](std::size_t t) {
        RngStream rng = RngStream(seed, 0).child(t);
        RVector z(n);
        for (int i = 0; i < n; ++i) z(i) = rng.normal();
        const RVector x = root * z;
        samples.col(static_cast<Eigen::Index>(t)) = (a * x.cast<cplx>()).cwiseAbs2();
    });
    out.mean = samples.rowwise().mean();
    const RMatrix centered = samples.colwise() - out.mean;
    out.variance = centered.rowwise().squaredNorm() / (trials - 1.0);
    out.mean_std_error = (out.variance / trials).cwiseSqrt();
    return out;
}

}  // namespace qlab::sigproc
