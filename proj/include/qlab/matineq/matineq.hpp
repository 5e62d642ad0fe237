#pragma once

#include "qlab/numkernel/linalg.hpp"

#include <string>
#include <vector>

namespace qlab::matineq {

// Witness for one inequality instance. Slack is the most violated direction:
// the smallest eigenvalue of (larger side - smaller side), or the smallest
// scalar difference for scalar inequalities.
struct IneqReport {
    std::string name;
    std::string instance;
    double min_slack = kInf;
    double scale = 1.0;
    double tol = 1e-9;
    bool pass = true;

    void absorb(double slack);
    void finalize();  // pass <=> min_slack >= -tol * scale
};

enum class ConvexFamily {
    Inverse,    // x^{-1}
    PowMinus,   // x^{a-1}
    PowPlus,    // x^{a+1}
    NegPow,     // -x^a
};

std::string to_string(ConvexFamily f);
ConvexFamily convex_family_from_string(const std::string& s);
double apply_family(ConvexFamily f, double a, double x);
HermitianMatrix apply_family(ConvexFamily f, double a, const HermitianMatrix& m);

IneqReport operator_convexity_check(ConvexFamily f, double a, const HermitianMatrix& A, const HermitianMatrix& B,
                                    const std::vector<double>& t_grid);

// f(K* X K) <= K* f(X) K for a contraction K and PSD X; f must satisfy f(0) <= 0.
IneqReport contraction_transform_check(ConvexFamily f, double a, const CMatrix& K, const HermitianMatrix& X);

// R1^{1-s} R2^s >= S1^{1-s} S2^s + T1^{1-s} T2^s. Commutation within each pair
// is the caller's responsibility; when it fails the difference is not
// Hermitian and the slack is taken from its Hermitian part.
IneqReport lieb_check(const HermitianMatrix& S1, const HermitianMatrix& S2, const HermitianMatrix& T1,
                      const HermitianMatrix& T2, const HermitianMatrix& R1, const HermitianMatrix& R2,
                      const std::vector<double>& s_grid);

// 1 - (S+T)^{-1/2} S (S+T)^{-1/2} <= 2 - 2S + 4T for 0 <= S <= 1, T >= 0.
IneqReport st_inequality_check(const HermitianMatrix& S, const HermitianMatrix& T);

// [[A, B], [B*, I]] >= 0 implies A >= B B*.
IneqReport schur_complement_check(const HermitianMatrix& A, const CMatrix& B);

// Product and sum forms of s(AB) weakly majorized by s(A) s(B), plus matrix
// Hoelder for (p, q) in {(2, 2), (3, 1.5)}.
IneqReport singular_majorization_check(const CMatrix& A, const CMatrix& B);

// Claim lambda_k(A-B) desc <= lambda_k(A) desc - lambda_k(B) asc for every k.
IneqReport eigen_gap_minmax_check(const HermitianMatrix& A, const HermitianMatrix& B);

// Weyl's family lambda_{i+j-1}(A-B) desc <= lambda_i(A) desc - lambda_j(B) asc.
IneqReport weyl_difference_check(const HermitianMatrix& A, const HermitianMatrix& B);

class GapError : public std::invalid_argument {
public:
    GapError(const std::string& what, double gap, double perturbation)
        : std::invalid_argument(what), gap_(gap), perturbation_(perturbation) {}
    double gap() const { return gap_; }
    double perturbation() const { return perturbation_; }

private:
    double gap_;
    double perturbation_;
};

struct EigenPerturbation {
    double delta_lambda;   // <v_k|dA|v_k>
    CVector delta_vector;  // sum_{j != k} |v_j><v_j|dA|v_k> / (lambda_k - lambda_j)
    double gap;            // distance from lambda_k to the rest of the spectrum
};

// Index k follows the ascending eigenvalue order of hermitian_eig.
EigenPerturbation eigen_perturbation_firstorder(const HermitianMatrix& A, const HermitianMatrix& dA, int k);

}  // namespace qlab::matineq
