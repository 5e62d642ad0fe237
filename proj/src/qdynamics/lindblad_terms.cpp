#include "qlab/qdynamics/phase_space.hpp"

#include "stencil.hpp"

#include <cmath>

namespace qlab::qdynamics {

LindbladTerms lindblad_wigner_terms(const std::vector<RVector>& g_samples, const PhaseGrid& grid, int order) {
    if (order < 2) throw std::invalid_argument("lindblad_wigner_terms: order must be >= 2");
    const int nq = grid.nq();
    LindbladTerms terms;
    terms.coeffs.assign(order + 1, RVector::Zero(nq));
    for (const RVector& g : g_samples) {
        if (g.size() != nq) throw GridError("lindblad_wigner_terms: g samples do not match the Q grid");
        require_finite(g, "lindblad_wigner_terms");
        // g(Q + q/2) - g(Q - q/2) = sum_j diff[j](Q) q^j
        std::vector<RVector> diff(order, RVector::Zero(nq));
        for (int j = 1; j < order; ++j) {
            const double weight = (std::pow(0.5, j) - std::pow(-0.5, j)) / std::tgamma(j + 1.0);
            if (weight == 0.0) continue;
            diff[j] = weight * detail::sample_derivative(g, j, grid.dq());
        }
        for (int n = 2; n <= order; ++n) {
            for (int i = 1; i < n; ++i) terms.coeffs[n] += diff[i].cwiseProduct(diff[n - i]);
        }
    }
    for (int n = 1; n <= order; n += 2) {
        terms.odd_magnitude = std::max(terms.odd_magnitude, terms.coeffs[n].cwiseAbs().maxCoeff());
    }
    return terms;
}

RMatrix apply_lindblad_terms(const LindbladTerms& terms, const RMatrix& w, const PhaseGrid& grid,
                             double* imag_residue) {
    if (terms.coeffs.empty()) return RMatrix::Zero(w.rows(), w.cols());
    if (terms.coeffs.front().size() != w.rows()) {
        throw GridError("apply_lindblad_terms: coefficient length does not match the field");
    }
    RMatrix out = RMatrix::Zero(w.rows(), w.cols());
    for (int n = 1; n <= terms.order(); ++n) {
        const RVector& gn = terms.coeffs[n];
        if (gn.cwiseAbs().maxCoeff() == 0.0) continue;
        // (i hbar)^n is real for even n and imaginary for odd n.
        const double magnitude = 0.5 * std::pow(grid.hbar(), n);
        const RMatrix term = gn.asDiagonal() * detail::p_derivative(w, n, grid.dp());
        if (n % 2 == 0) {
            const double sign = (n % 4 == 0) ? 1.0 : -1.0;
            out -= (magnitude * sign) * term;
        } else if (imag_residue) {
            *imag_residue = std::max(*imag_residue, magnitude * term.cwiseAbs().maxCoeff());
        }
    }
    return out;
}

}  // namespace qlab::qdynamics
