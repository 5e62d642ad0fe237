#pragma once

#include "qlab/numkernel/linalg.hpp"
#include "qlab/numkernel/rng.hpp"

namespace qlab::random {

CMatrix ginibre(RngStream& rng, Eigen::Index rows, Eigen::Index cols);
CVector complex_normal(RngStream& rng, Eigen::Index n);
HermitianMatrix hermitian(RngStream& rng, Eigen::Index dim);
CMatrix unitary(RngStream& rng, Eigen::Index dim);  // Haar
// G*G + eps I with eps = 1e-6 Tr(G*G)/d.
HermitianMatrix positive_definite(RngStream& rng, Eigen::Index dim);
// Unit-trace PSD of the given rank (rank <= 0 means full).
HermitianMatrix density(RngStream& rng, Eigen::Index dim, Eigen::Index rank = 0);
RVector probability_vector(RngStream& rng, Eigen::Index n);
// Nonnegative row-stochastic matrix with strictly positive entries.
RMatrix stochastic_matrix(RngStream& rng, Eigen::Index n);

}  // namespace qlab::random
