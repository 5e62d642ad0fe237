#pragma once

#include "qlab/numkernel/rng.hpp"
#include "qlab/numkernel/types.hpp"

#include <functional>
#include <vector>

namespace qlab::filters {

// ------ Kushner-Kallianpur grid filter ------

// dQ = P/m dt, dP = -(U'(Q) + gamma P) dt + sigma dB,
// dY = (alpha Q + beta P) dt + noise_scale dV.
struct KushnerModel {
    double mass = 1.0;
    double gamma = 0.0;
    double sigma = 0.0;
    std::function<double(double)> force;  // U'(Q)
    double alpha = 0.0;                   // 2 Re(a)
    double beta = 0.0;                    // 2 Re(b)
    double noise_scale = 1.0;
};

// Cell-centred density on [q_lo, q_hi] x [p_lo, p_hi]; rows index Q.
class KushnerGrid {
public:
    KushnerGrid(KushnerModel model, double q_lo, double q_hi, int nq, double p_lo, double p_hi, int np);

    const KushnerModel& model() const { return model_; }
    int nq() const { return static_cast<int>(q_.size()); }
    int np() const { return static_cast<int>(p_.size()); }
    double dq() const { return dq_; }
    double dp() const { return dp_; }
    const RVector& q_points() const { return q_; }
    const RVector& p_points() const { return p_; }

    RMatrix density;  // sums to 1 with the cell area dq dp

    void set_gaussian(double mean_q, double mean_p, double var_q, double var_p, double cov_qp);
    double mass() const { return density.sum() * dq_ * dp_; }
    RVector mean() const;        // (E Q, E P)
    RMatrix covariance() const;  // 2x2

    // Largest dt for which the explicit FP step is stable.
    double max_dt() const;
    // d/dt p = L* p (conservative central fluxes, zero flux at the box edges).
    RMatrix fokker_planck_rhs(const RMatrix& p) const;

private:
    KushnerModel model_;
    RVector q_, p_;
    double dq_, dp_;
    RVector force_;  // U' at the Q nodes
};

struct KushnerStepInfo {
    double clipped_mass;  // negative mass removed by the positivity clip
    double mass_before_normalization;
};

// One step: RK4 Fokker-Planck over dt, then the observation update in
// likelihood form p <- p exp((h dY - h^2 dt / 2) / noise_scale^2), h = alpha Q
// + beta P, followed by renormalization. With alpha = beta = 0 the
// observation update is skipped. Throws qdynamics::CflError when dt exceeds
// max_dt().
KushnerStepInfo kushner_filter_step(KushnerGrid& grid, double dy, double dt);

// ------ Kalman-Bucy reference ------

// dx = A x dt + dB (Cov dB = diffusion dt), dY = C x dt + dV (Cov dV = noise dt).
struct LinearDiffusion {
    RMatrix a;
    RMatrix diffusion;
    RMatrix c;
    RMatrix noise;
};

struct KalmanBucyState {
    RVector mean;
    RMatrix covariance;
};

// Euler step of the mean driven by dY; RK4 step of the Riccati equation
// P' = AP + PA' + diffusion - P C' noise^{-1} C P.
void kalman_bucy_step(const LinearDiffusion& model, KalmanBucyState& state, const RVector& dy, double dt);

// ------ Belavkin quantum filter ------

// Conditional state in a truncated basis. The filter is
//   d rho = theta0*(rho) dt + (L* rho + rho L - <L + L*> rho)(dY - <L + L*> dt),
//   theta0*(rho) = -(i/hbar)[H, rho] - (1/2)(L L* rho + rho L L* - 2 L* rho L),
// i.e. L* plays the role of the jump operator.
struct BelavkinState {
    CMatrix rho;
    CMatrix hamiltonian;
    CMatrix lindblad;  // L
    double hbar = 1.0;
    double time = 0.0;
    std::vector<double> innovations;  // dY - <L + L*> dt per step
    double max_leakage = 0.0;         // max over steps of <top level|rho|top level>
};

inline constexpr double kLeakageLimit = 1e-6;

// For Hermitian L the measurement and dissipation factor exp(L dY - L^2 dt) is
// applied exactly between two half-step unitaries; otherwise a first-order
// Kraus step with the Milstein correction is used. The result is normalized
// and Hermitized. `with_innovation = false` drops the measurement term (the
// unconditional GKSL evolution with jump L*). Throws std::runtime_error when
// the population of the last basis state exceeds kLeakageLimit.
class BelavkinFilter {
public:
    BelavkinFilter(const CMatrix& hamiltonian, const CMatrix& lindblad, double dt, double hbar = 1.0);

    void step(BelavkinState& state, double dy, bool with_innovation = true) const;
    double dt() const { return dt_; }
    bool hermitian_lindblad() const { return hermitian_; }

private:
    CMatrix lindblad_;
    double dt_;
    double hbar_;
    bool hermitian_;
    CMatrix half_unitary_;
    RVector lindblad_values_;   // Hermitian case
    CMatrix lindblad_vectors_;
    CMatrix kraus_drift_;       // I - ((i/hbar) H + J*J / 2) dt, J = L*
    CMatrix jump_;              // J
    CMatrix jump_square_;       // J^2
    CMatrix hamiltonian_;
};

// Convenience wrapper building a BelavkinFilter from the state for one step.
void belavkin_filter_step(BelavkinState& state, double dy, double dt, bool with_innovation = true);

double expectation(const CMatrix& rho, const CMatrix& op);  // Re Tr(rho op)

// ------ shared-path cross-check ------

struct CrossCheckConfig {
    int basis_dim = 64;
    double omega = 1.0;     // H = P^2/2 + omega^2 Q^2 / 2, unit mass and hbar
    double coupling = 1.0;  // L = a Q with a real
    double true_alpha = 1.0;  // the record comes from a coherent state |alpha>
    double horizon = 1.0;
    double dt = 1e-3;
    double q_half_width = 6.0;
    double p_half_width = 6.0;
    int grid_points = 121;
    std::uint64_t seed = 7;
};

struct CrossCheckResult {
    std::vector<double> times;
    std::vector<double> belavkin_q, belavkin_p, kushner_q, kushner_p;
    std::vector<double> posterior_std_q, posterior_std_p;  // from the Belavkin state
    double rms_q;          // RMS of the mean difference over time
    double rms_p;
    double mean_std_q;     // time average of the posterior std
    double mean_std_p;
    double relative;       // max(rms_q / mean_std_q, rms_p / mean_std_p)
    double max_leakage;
};

// Both filters start from the vacuum (Wigner: zero mean, covariance 1/2) and
// see one measurement record dY = 2a <Q>_true dt + dW, where the true state
// follows its own quantum trajectory from |true_alpha>.
CrossCheckResult belavkin_kushner_crosscheck(const CrossCheckConfig& config);

struct EnsembleCheck {
    double max_z;  // largest |mean - GKSL| / standard error over the observables
    std::vector<double> gksl, ensemble_mean, standard_error;  // Q, P, Q^2, P^2, (QP+PQ)/2
    int trajectories;
};

// Averages the self-driven Belavkin filter (dY = <L + L*> dt + dW from its own
// state) over trajectories and compares moments with the GKSL evolution.
EnsembleCheck belavkin_ensemble_check(const CrossCheckConfig& config, int trajectories, int jobs = 1);

}  // namespace qlab::filters
