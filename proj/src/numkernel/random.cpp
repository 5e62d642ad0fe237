#include "qlab/numkernel/random.hpp"

#include <array>
#include <cmath>

namespace qlab {

// ------ RngStream ------

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream_id) : seed_(seed), stream_(stream_id) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream_id),
                      static_cast<std::uint32_t>(stream_id >> 32), 0x9e3779b9u};
    engine_.seed(seq);
}

double RngStream::exponential(double rate) {
    if (!(rate > 0.0)) throw std::invalid_argument("RngStream::exponential: rate must be > 0");
    return std::exponential_distribution<double>(rate)(engine_);
}

std::uint64_t RngStream::poisson(double mean) {
    if (!(mean >= 0.0)) throw std::invalid_argument("RngStream::poisson: mean must be >= 0");
    if (mean == 0.0) return 0;
    return std::poisson_distribution<std::uint64_t>(mean)(engine_);
}

RngStream RngStream::child(std::uint64_t index) const {
    // mix the parent stream id and the index into a new id
    std::uint64_t z = stream_ * 0x9e3779b97f4a7c15ULL + index + 0x632be59bd9b4e019ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return RngStream(seed_, z ^ (z >> 31));
}

namespace random {

CMatrix ginibre(RngStream& rng, Eigen::Index rows, Eigen::Index cols) {
    CMatrix g(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j)
        for (Eigen::Index i = 0; i < rows; ++i) {
            const double re = rng.normal();
            const double im = rng.normal();
            g(i, j) = cplx(re, im) / std::sqrt(2.0);
        }
    return g;
}

CVector complex_normal(RngStream& rng, Eigen::Index n) { return ginibre(rng, n, 1).col(0); }

HermitianMatrix hermitian(RngStream& rng, Eigen::Index dim) {
    const CMatrix g = ginibre(rng, dim, dim);
    return HermitianMatrix::project(g + g.adjoint());
}

CMatrix unitary(RngStream& rng, Eigen::Index dim) {
    const CMatrix g = ginibre(rng, dim, dim);
    Eigen::HouseholderQR<CMatrix> qr(g);
    CMatrix q = qr.householderQ() * CMatrix::Identity(dim, dim);
    const CMatrix r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (Eigen::Index j = 0; j < dim; ++j) {
        const cplx d = r(j, j);
        if (std::abs(d) > 0.0) q.col(j) *= d / std::abs(d);
    }
    return q;
}

HermitianMatrix positive_definite(RngStream& rng, Eigen::Index dim) {
    const CMatrix g = ginibre(rng, dim, dim);
    CMatrix a = g.adjoint() * g;
    const double eps = 1e-6 * a.trace().real() / static_cast<double>(dim);
    a += eps * CMatrix::Identity(dim, dim);
    return HermitianMatrix::project(a);
}

HermitianMatrix density(RngStream& rng, Eigen::Index dim, Eigen::Index rank) {
    if (rank <= 0 || rank > dim) rank = dim;
    const CMatrix g = ginibre(rng, dim, rank);
    CMatrix a = g * g.adjoint();
    a /= a.trace().real();
    return HermitianMatrix::project(a);
}

RVector probability_vector(RngStream& rng, Eigen::Index n) {
    RVector p(n);
    for (Eigen::Index i = 0; i < n; ++i) p(i) = rng.exponential(1.0);
    return p / p.sum();
}

RMatrix stochastic_matrix(RngStream& rng, Eigen::Index n) {
    RMatrix m(n, n);
    for (Eigen::Index i = 0; i < n; ++i) m.row(i) = probability_vector(rng, n).transpose();
    return m;
}

}  // namespace random
}  // namespace qlab
