#include "qlab/matineq/instances.hpp"

#include <Eigen/SVD>

namespace qlab::matineq {

CMatrix random_contraction(RngStream& rng, Eigen::Index dim) {
    const CMatrix g = random::ginibre(rng, dim, dim);
    Eigen::BDCSVD<CMatrix> svd(g, Eigen::ComputeFullU | Eigen::ComputeFullV);
    RVector s = svd.singularValues();
    for (Eigen::Index i = 0; i < s.size(); ++i) s(i) = std::min(s(i) / 1.5, 1.0);
    return svd.matrixU() * s.cast<cplx>().asDiagonal() * svd.matrixV().adjoint();
}

namespace {

HermitianMatrix in_basis(const CMatrix& u, const RVector& values) {
    return HermitianMatrix::project(u * values.cast<cplx>().asDiagonal() * u.adjoint());
}

RVector uniform_vector(RngStream& rng, Eigen::Index n, double lo, double hi) {
    RVector v(n);
    for (Eigen::Index i = 0; i < n; ++i) v(i) = lo + (hi - lo) * rng.uniform();
    return v;
}

}  // namespace

LiebInstance random_lieb_instance(RngStream& rng, Eigen::Index dim) {
    LiebInstance out{{HermitianMatrix::identity(dim), HermitianMatrix::identity(dim)},
                     {HermitianMatrix::identity(dim), HermitianMatrix::identity(dim)},
                     {HermitianMatrix::identity(dim), HermitianMatrix::identity(dim)}};
    const CMatrix us = random::unitary(rng, dim), ut = random::unitary(rng, dim), ur = random::unitary(rng, dim);
    for (int k = 0; k < 2; ++k) {
        out.S[k] = in_basis(us, uniform_vector(rng, dim, 0.0, 1.0));
        out.T[k] = in_basis(ut, uniform_vector(rng, dim, 0.0, 1.0));
        // R_k >= S_k + T_k because its smallest eigenvalue dominates their top one
        const double floor = max_eigenvalue(out.S[k] + out.T[k]) * (1.0 + 1e-3);
        out.R[k] = in_basis(ur, uniform_vector(rng, dim, floor, 1.5 * floor));
    }
    return out;
}

LiebInstance lieb_violation_probe(RngStream& rng, Eigen::Index dim) {
    LiebInstance out{{HermitianMatrix::identity(dim), HermitianMatrix::identity(dim)},
                     {HermitianMatrix::identity(dim), HermitianMatrix::identity(dim)},
                     {HermitianMatrix::identity(dim), HermitianMatrix::identity(dim)}};
    for (int k = 0; k < 2; ++k) {
        const RVector r = uniform_vector(rng, dim, 0.2, 2.0);
        out.R[k] = HermitianMatrix::diagonal(r);
        const HermitianMatrix c = in_basis(random::unitary(rng, dim), uniform_vector(rng, dim, 0.0, 1.0));
        const CMatrix root = r.cwiseSqrt().cast<cplx>().asDiagonal();
        out.S[k] = HermitianMatrix::project(root * c.matrix() * root);
        out.T[k] = out.R[k] - out.S[k];
    }
    return out;
}

std::pair<HermitianMatrix, HermitianMatrix> random_st_pair(RngStream& rng, Eigen::Index dim) {
    const HermitianMatrix s = in_basis(random::unitary(rng, dim), uniform_vector(rng, dim, 0.0, 1.0));
    const HermitianMatrix t = random::positive_definite(rng, dim) * (0.5 * rng.uniform());
    return {s, t};
}

std::pair<HermitianMatrix, CMatrix> random_schur_pair(RngStream& rng, Eigen::Index dim) {
    const CMatrix b = random::ginibre(rng, dim, dim);
    const HermitianMatrix noise = random::positive_definite(rng, dim) * (0.1 * rng.uniform());
    return {HermitianMatrix::project(b * b.adjoint()) + noise, b};
}

}  // namespace qlab::matineq
