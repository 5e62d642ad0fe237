#pragma once

#include "qlab/numkernel/rng.hpp"
#include "qlab/numkernel/types.hpp"

#include <cstdint>
#include <functional>
#include <vector>

namespace qlab::sigproc {

// ------ autoregressive models ------

// x[n] + sum_k a[k] x[n-k] = e[n], Var e = innovation_variance.
struct ARModel {
    RVector coefficients;         // a[1..p]
    double innovation_variance;   // sigma^2
    RVector autocorrelation;      // R[0..p]

    int order() const { return static_cast<int>(coefficients.size()); }
};

struct LevinsonResult {
    ARModel model;
    RVector reflection;  // k_1..k_p
};

// Reflection coefficients of the Levinson recursion without any validity
// check; |k_m| >= 1 for some m exactly when Toeplitz(R) is not PD. A zero
// intermediate error power stops the recursion and fills the rest with NaN.
RVector reflection_coefficients(const RVector& acf);

// Throws std::invalid_argument unless Toeplitz(R[0..p]) is PD.
LevinsonResult levinson(const RVector& acf);
// Direct solve of the normal equations a = -R_p^{-1} r_p.
ARModel yule_walker(const RVector& acf);

// Model from its coefficients and innovation variance; R[0..p] solves the
// extended Yule-Walker system. Throws if A(z) is not minimum phase.
ARModel ar_from_coefficients(const RVector& coefficients, double innovation_variance);
// R[0..max_lag] by the AR recursion beyond lag p.
RVector ar_autocorrelation(const ARModel& model, int max_lag);
// sigma^2 / |1 + sum_k a[k] e^{-j w k}|^2.
RVector ar_psd(const ARModel& model, const RVector& omegas);

// Stationary sample path of the given length.
RVector ar_synthesize(const ARModel& model, int length, RngStream& rng);

// Least-squares fit from samples x[0..p+N-1]: the first p entries are
// presamples, the window sums run over the last N.
RVector ar_least_squares(const RVector& samples, int order);

// E x[n] x[n+t1] x[n+t2] x[n+t3].
using FourthMoment = std::function<double(int, int, int)>;
FourthMoment gaussian_fourth_moment(const RVector& acf_to_max_lag);

struct ARBias {
    RVector predicted;  // E[delta a] through second order in the correlation errors
    int samples;        // N
};

// Needs the autocorrelation out to lag N + p, which gaussian kernels take
// from ar_autocorrelation.
ARBias ar_perturbation_bias(const ARModel& model, int samples, const FourthMoment& kernel);
ARBias ar_perturbation_bias(const ARModel& model, int samples);  // Gaussian kernel

struct ARBiasMonteCarlo {
    RVector mean_error;      // mean of a_hat - a
    RVector standard_error;  // MC std of that mean
    int runs;
};

ARBiasMonteCarlo ar_bias_monte_carlo(const ARModel& model, int samples, int runs, std::uint64_t seed,
                                     int jobs = 0);

// ------ subspace frequency estimation ------

// R = E D E* + sigma^2 I and R1 = E D Phi* E* + sigma^2 Z for the steering
// vectors e(w) = [1, e^{jw}, ..., e^{j(N-1)w}].
struct SubspaceModel {
    int sensors = 0;
    RVector frequencies;
    CMatrix source_covariance;  // D, Hermitian PD
    double noise_variance = 0.0;
    CMatrix noise_shift;        // Z; empty means identity

    int sources() const { return static_cast<int>(frequencies.size()); }
    void validate() const;
    CMatrix manifold() const;
    CMatrix covariance() const;
    CMatrix shifted_covariance() const;
    CMatrix shift_structure() const;
};

CVector steering(int sensors, double omega);

struct SubspaceDecomp {
    RVector values;   // descending
    CMatrix vectors;  // matching columns
    int sources = 0;

    CMatrix signal() const { return vectors.leftCols(sources); }
    CMatrix noise() const { return vectors.rightCols(vectors.cols() - sources); }
    double noise_floor() const;  // mean of the N - p smallest eigenvalues
};

SubspaceDecomp subspace_decomposition(const CMatrix& covariance, int sources);

struct MusicSpectrum {
    RVector omegas;
    RVector null_spectrum;  // Q(w) = 1 - N^{-1} |V_S* e(w)|^2
    RVector pseudo_spectrum;  // P(w) = 1 / Q(w), infinite at exact zeros
    RVector peaks;          // p refined frequencies, ascending
};

double music_null(const CMatrix& signal_projector, double omega);

// Peaks are the p deepest local minima of Q on the (circular) grid,
// refined by three-point parabolic interpolation and then Newton steps on Q'.
MusicSpectrum music_spectrum(const CMatrix& covariance, int sources, const RVector& omegas);

struct MusicPerturbation {
    RVector delta_omega;
    std::vector<CVector> delta_signal;  // Q_i dR v_i
};

// First-order shift of each true frequency under R -> R + dR.
MusicPerturbation music_perturbation(const CMatrix& covariance, int sources, const RVector& frequencies,
                                     const CMatrix& delta);

struct EspritResult {
    CVector gamma;   // rank-reducing numbers, sorted by angle
    RVector omegas;  // arg gamma
    CMatrix m, x;    // V_S* R_S V_S and V_S* R_S1 V_S
    double noise_floor;
};

EspritResult esprit_solve(const CMatrix& covariance, const CMatrix& shifted, int sources, const CMatrix& shift_structure);
EspritResult esprit_solve(const SubspaceModel& model);

// delta gamma = <eta| dM - gamma dX |xi> / <eta| X |xi> with the noise floor
// re-estimated from the perturbed noise eigenvalues.
CVector esprit_perturbation(const CMatrix& covariance, const CMatrix& shifted, int sources,
                            const CMatrix& shift_structure, const CMatrix& delta, const CMatrix& delta_shifted);

// ------ LMS ------

struct LMSConfig {
    double step = 0.0;            // mu
    RMatrix input_covariance;     // R
    RVector cross_correlation;    // r
    double desired_power = 0.0;   // E d^2

    void validate() const;
    RVector wiener_solution() const;  // h0 = R^{-1} r
};

struct LMSAnalysis {
    std::vector<RVector> mean;    // lambda(0..steps)
    RMatrix steady_covariance;    // V, +inf entries when the second moments diverge
    double mean_radius;           // spectral radius of I - 2 mu R
    double covariance_radius;     // spectral radius of E[(I - 2mu XX') (x) (I - 2mu XX')]
    bool converges;
};

LMSAnalysis lms_analyze(const LMSConfig& config, const RVector& initial, int steps);

struct LMSSimulation {
    std::vector<RVector> mean;           // across trials
    std::vector<RVector> mean_std_error;
    RMatrix steady_covariance;           // over trials and the second half of each run
    int trials;
};

LMSSimulation lms_simulate(const LMSConfig& config, const RVector& initial, int steps, int trials,
                           std::uint64_t seed, int jobs = 0);

// ------ periodogram ------

struct PeriodogramPlan {
    int block_length = 0;
    RVector window;   // w[0..N-1]; empty means rectangular
    RVector omegas;

    RVector taps() const;
};

// |N^{-1/2} sum_n w[n] x[n] e^{-jwn}|^2 on the plan's grid.
RVector periodogram(const PeriodogramPlan& plan, const RVector& block);

struct PeriodogramStats {
    RVector mean;               // Monte Carlo
    RVector variance;
    RVector mean_std_error;
    RVector expected_mean;      // N^{-1} sum w[n] w[m] R[n-m] e^{-jw(n-m)}
    RVector expected_variance;  // s^2 + |c|^2 with c = E X_N(w)^2
    int trials;
};

// acf holds R[0..N-1] of a real stationary Gaussian process.
PeriodogramStats periodogram_stats(const PeriodogramPlan& plan, const RVector& acf, int trials, std::uint64_t seed,
                                   int jobs = 0);

}  // namespace qlab::sigproc
