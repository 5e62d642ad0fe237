#pragma once

#include "qlab/numkernel/types.hpp"

#include <functional>
#include <vector>

namespace qlab::filters {

// x[n+1] = A x[n] + w[n+1], z[n] = C x[n] + v[n]; w ~ (0, Q), v ~ (0, R)
// mutually uncorrelated.
struct LinearModel {
    RMatrix a;
    RMatrix c;
    RMatrix q;
    RMatrix r;

    Eigen::Index states() const { return a.rows(); }
    Eigen::Index outputs() const { return c.rows(); }
    void validate() const;  // shapes, Q PSD, R PD
};

// Stabilizing solution of P = A P A' + Q - A P C'(C P C' + R)^{-1} C P A'
// (the one-step predicted covariance) by structure-preserving doubling.
RMatrix solve_filter_riccati(const LinearModel& model, double tol = 1e-14, int max_iter = 100);

// Max-abs residual of the predicted-covariance Riccati equation.
double riccati_residual(const LinearModel& model, const RMatrix& predicted);

struct SteadyKalman {
    RMatrix predicted;  // P(n+1|n)
    RMatrix filtered;   // P(n|n)
    RMatrix gain;       // K with x(n|n) = x(n|n-1) + K (z[n] - C x(n|n-1))
    RMatrix transition; // D = (I - K C) A, so x(n|n) = D x(n-1|n-1) + K z[n]
    double residual;
};

SteadyKalman steady_kalman(const LinearModel& model);

struct KalmanRun {
    std::vector<RVector> estimates;    // x(n|n)
    std::vector<RMatrix> covariances;  // P(n|n)
    std::vector<RMatrix> gains;
    SteadyKalman steady;
    double final_change;  // ||P(N|N) - P(N-1|N-1)||_max
};

// Filters z[0..N-1] starting from x(0|-1) = x0, P(0|-1) = p0. A model with no
// outputs (C has zero rows) propagates the Lyapunov recursion.
KalmanRun kalman_filter(const LinearModel& model, const std::vector<RVector>& measurements, const RVector& x0,
                        const RMatrix& p0);

// Iterates the covariance recursion from p0 until ||P(n+1|n+1) - P(n|n)||_max
// <= tol; returns the number of steps taken. Throws ConvergenceError otherwise.
int kalman_covariance_settle(const LinearModel& model, const RMatrix& p0, RMatrix& filtered, double tol = 1e-10,
                             int max_steps = 100000);

// Impulse response of the steady filter mapping z to `selector * x(n|n)`.
std::vector<RMatrix> steady_filter_response(const SteadyKalman& steady, const RMatrix& selector, int length);

// Wide-sense stationary pair (s, X) generated by a stable LinearModel: X = z and
// s[n] = selector * x[n]. Both spectra are rational and fixed by the model.
struct SpectralPair {
    LinearModel model;
    RMatrix selector;

    RMatrix state_covariance() const;  // stationary Pi = A Pi A' + Q
    RMatrix rxx(int lag) const;        // E X[n+lag] X[n]'
    RMatrix rsx(int lag) const;        // E s[n+lag] X[n]'
};

struct WienerFilter {
    std::vector<RMatrix> coefficients;   // h[0..M-1]: s^[n] = sum_k h[k] X[n-k]
    std::vector<RMatrix> factor;         // minimum-phase L(z) coefficients, L[0] = I
    RMatrix innovation_covariance;       // S_XX(z) = L(z) Re L(1/z)'
    double tail;                         // max |h[k]| over the last 10% of the kept terms
};

// Causal Wiener filter H(z) = [S_SX(z) L(1/z)^{-T}]_+ Re^{-1} L(z)^{-1}, with the
// spectral factor from the innovations form of the filter Riccati solution.
// Coefficient sequences are truncated at `length` terms.
WienerFilter causal_wiener(const SpectralPair& pair, int length = 256);

// max over m = 0..lags and entries of |sum_k h[k] Rxx[m-k] - Rsx[m]|.
double wiener_hopf_residual(const SpectralPair& pair, const std::vector<RMatrix>& h, int lags);

// Steady-state mean-square error trace of the causal filter and of the
// two-sided (noncausal) filter, the latter by frequency-domain quadrature.
double causal_wiener_mse(const SpectralPair& pair, const WienerFilter& filter);
double noncausal_wiener_mse(const SpectralPair& pair, int frequencies = 4096);

// ------ recursive least squares ------

struct RlsResult {
    std::vector<RVector> estimates;  // theta(N) for N = start..total
    std::vector<RMatrix> gains;      // K(N+1) for each recursive step
    int start;                       // samples absorbed by the batch start
    RMatrix inverse_information;     // R(N)^{-1} at the end
};

// theta(N+1) = theta(N) + K(N+1)(X(N+1) - H(N+1) theta(N)) with R(N)^{-1}
// updated by the matrix inversion lemma. The recursion starts from the exact
// batch solution once sum H'H is positive definite; `ridge` > 0 instead starts
// at N = 0 from R(0) = ridge I, theta(0) = 0.
RlsResult rls_identify(const std::vector<RMatrix>& regressors, const std::vector<RVector>& observations,
                       double ridge = 0.0);

// R(N)^{-1} r(N) from the first `count` samples, plus ridge I in R.
RVector batch_least_squares(const std::vector<RMatrix>& regressors, const std::vector<RVector>& observations,
                            int count, double ridge = 0.0);

// ------ linearized fluctuation covariance ------

// Stationary input correlation R_w(tau) = E w(t+tau) w(t)'. A white part
// contributes white_intensity * delta(tau) on top of the smooth part.
struct NoiseCorrelation {
    std::function<RMatrix(double)> smooth;  // may be empty
    RMatrix white_intensity;                // may be empty
    double sup_norm = 0.0;                  // B >= sup_tau ||R_w(tau)||_2 (smooth part)
};

struct FluctuationCovariance {
    double trace;            // P_x = Tr int int Phi(t1) R_w(t1 - t2) Phi(t2)' dt1 dt2
    RMatrix covariance;      // the matrix before the trace
    double modal_bound;      // B sum_{k,m} 1/Re(lambda_k + lambda_m)
    double bound;            // 2 B r^2 / min Re(lambda_k)
    double smooth_trace;     // contribution of the smooth part
    bool bound_holds;        // smooth_trace <= bound
};

// A = f'(x0) must be stable and diagonalizable. The smooth part is split at
// t1 = t2 and integrated by composite Gauss-Legendre on geometric panels
// covering [0, horizon] (horizon defaults to 40 over the slowest decay rate);
// the white part goes through the Lyapunov equation. A zero sup_norm is
// replaced by the largest ||R_w|| seen on the quadrature lags.
FluctuationCovariance linearized_fluctuation_covariance(const RMatrix& a, const NoiseCorrelation& noise,
                                                        int nodes_per_panel = 16, double horizon = 0.0);

// Solves A X + X A' + W = 0 for stable A (Kronecker form).
RMatrix continuous_lyapunov(const RMatrix& a, const RMatrix& w);
// Solves X = A X A' + W for stable A (Kronecker form).
RMatrix discrete_lyapunov(const RMatrix& a, const RMatrix& w);

}  // namespace qlab::filters
