#pragma once

#include "qlab/numkernel/random.hpp"

#include <array>

namespace qlab::matineq {

// Random inputs satisfying each check's hypotheses.

// Singular values of a Ginibre draw clipped into [0, 1].
CMatrix random_contraction(RngStream& rng, Eigen::Index dim);

// Commuting pairs (shared eigenbasis within each pair) with S_k + T_k <= R_k.
struct LiebInstance {
    std::array<HermitianMatrix, 2> S, T, R;
};
LiebInstance random_lieb_instance(RngStream& rng, Eigen::Index dim);

// Violation probe: R_k diagonal, S_k = R_k^{1/2} C_k R_k^{1/2} with 0 <= C_k <= 1
// drawn independently so S1 and S2 do not commute, T_k = R_k - S_k.
LiebInstance lieb_violation_probe(RngStream& rng, Eigen::Index dim);

// 0 <= S <= 1 and T >= 0.
std::pair<HermitianMatrix, HermitianMatrix> random_st_pair(RngStream& rng, Eigen::Index dim);

// A = B B* + PSD noise, so the block [[A, B], [B*, I]] is PSD.
std::pair<HermitianMatrix, CMatrix> random_schur_pair(RngStream& rng, Eigen::Index dim);

}  // namespace qlab::matineq
