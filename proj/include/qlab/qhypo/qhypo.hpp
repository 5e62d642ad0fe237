#pragma once

#include "qlab/qstate/qstate.hpp"

#include <vector>

namespace qlab {

// ------ binary tests ------

struct HelstromResult {
    HermitianMatrix test;  // projection onto the nonnegative eigenspace of A - B
    double cost;           // Tr A(1 - T) + Tr B T
};

HelstromResult helstrom_test(const HermitianMatrix& a, const HermitianMatrix& b);
double test_cost(const HermitianMatrix& a, const HermitianMatrix& b, const CMatrix& test);

struct ChernoffResult {
    double s_star;
    double value;  // min over s in [0,1] of Tr(A^{1-s} B^s)
    bool disjoint_supports;
};

// Golden-section minimization of the convex map s -> Tr(A^{1-s} B^s).
ChernoffResult chernoff_bound(const DensityMatrix& a, const DensityMatrix& b, double s_tol = 1e-10);

struct ClassicalEmbedding {
    RMatrix p;  // p(i) |<e_i|f_j>|^2
    RMatrix q;  // q(j) |<e_i|f_j>|^2
};

ClassicalEmbedding classical_embedding(const DensityMatrix& rho, const DensityMatrix& sigma);

struct DetectionBound {
    double value;       // (1/4) sum min(P, Q)
    double cost_bound;  // (1/2) sum min(P, Q), the direct bound on Tr rho(1-T) + Tr sigma T
};

DetectionBound detection_error_lower_bound(const DensityMatrix& rho, const DensityMatrix& sigma);

// ------ Stein sweep ------

struct HypothesisPair {
    DensityMatrix rho;    // P1(n) = Tr rho^n (1 - T_n)
    DensityMatrix sigma;  // P2(n) = Tr sigma^n T_n
};

struct FrontierPoint {
    int n;
    double threshold;  // R in T_n = {exp(nR) rho^n - sigma^n >= 0}
    double p1;
    double p2;
};

struct SteinRow {
    int n;
    double best_p1;   // min P1 subject to P2 <= alpha on the completed frontier
    double exponent;  // (1/n) log best_p1
    double helstrom_cost;
    double chernoff_value;  // (min_s Tr rho^{1-s} sigma^s)^n
};

struct SteinSweep {
    std::vector<FrontierPoint> frontier;
    std::vector<SteinRow> rows;
    std::vector<double> thresholds;
    double d_sigma_rho;  // D(sigma|rho), the limiting exponent is its negative
};

// Default threshold grid: 20 log-spaced magnitudes up to 2 max(D(rho|sigma),
// D(sigma|rho)), mirrored, plus zero.
std::vector<double> stein_threshold_grid(const HypothesisPair& pair);

SteinSweep stein_sweep(const HypothesisPair& pair, int n_max, double alpha_cap,
                       std::vector<double> thresholds = {});

// Lower convex hull of (P2, P1) points including the trivial tests, and its
// value at P2 = alpha (linear interpolation models randomized completion).
double frontier_p1_at(const std::vector<std::pair<double, double>>& p2_p1, double alpha);

// ------ classical-quantum channel quantities ------

struct CqEnsemble {
    RVector prior;
    std::vector<DensityMatrix> states;

    void validate() const;
    HermitianMatrix average() const;  // W_p
};

double holevo_information(const CqEnsemble& ens);

struct CqRenyiResult {
    double information;  // I_s(X, Y) at the optimizing prior
    RVector prior;       // p_s
    DensityMatrix sigma;
    bool converged;
    int iterations;
};

// Tr (sum_x p(x) W_x^{1-s})^{1/(1-s)}
double cq_renyi_trace(const CqEnsemble& ens, const RVector& prior, double s);
// I_s for a fixed prior.
double cq_renyi_information_at(const CqEnsemble& ens, const RVector& prior, double s);
// s in (-1, 0): p_s by projected ascent over the simplex with restarts.
CqRenyiResult cq_renyi_information(const CqEnsemble& ens, double s, int passes = 200, int restarts = 3);

struct CqDirectBound {
    double bound;
    double log_bound;
};

// 2^{s+2} exp(s n (R + s^{-1} log sum_x p(x) Tr(W_x^{1-s} W_p^s))), s in (0, 1].
CqDirectBound cq_direct_exponent(const CqEnsemble& ens, double s, double rate, int n);

struct RenyiPinching {
    double before;  // Tr(A^{1-t} B^t)
    double after;   // same for the pinched pair
};

RenyiPinching renyi_pinching_monotonicity(const DensityMatrix& a, const DensityMatrix& b, double t,
                                          const PVM& pvm);

RVector project_to_simplex(const RVector& v);

}  // namespace qlab
