#pragma once

#include "qlab/filters/linear.hpp"
#include "qlab/numkernel/rng.hpp"
#include "qlab/numkernel/types.hpp"

#include <functional>
#include <vector>

namespace qlab::filters {

// x(n+1) = f(x(n), u(n)) + w(n+1), z(n) = h(x(n), u(n)) + v(n).
struct StateSpaceModel {
    using Map = std::function<RVector(const RVector& x, const RVector& u)>;
    using Jacobian = std::function<RMatrix(const RVector& x, const RVector& u)>;

    Map drift;
    Map observation;
    RMatrix q;
    RMatrix r;
    Jacobian drift_jacobian;        // optional; central differences otherwise
    Jacobian observation_jacobian;  // optional

    Eigen::Index states() const { return q.rows(); }
    Eigen::Index outputs() const { return r.rows(); }
    void validate() const;

    RMatrix drift_derivative(const RVector& x, const RVector& u) const;
    RMatrix observation_derivative(const RVector& x, const RVector& u) const;

    static StateSpaceModel from_linear(const LinearModel& model);
};

struct GaussianEstimate {
    RVector mean;
    RMatrix covariance;
    RMatrix gain;  // last measurement gain; empty before the first update
};

// Extended Kalman filter: predict through f then update with z(n+1).
GaussianEstimate ekf_step(const StateSpaceModel& model, const GaussianEstimate& state, const RVector& z,
                          const RVector& u = {}, const RVector& u_next = {});

inline constexpr int kDefaultSigmaPoints = 512;

// Monte Carlo sigma-point filter: K iid N(0, I) draws push x(n|n) + sqrt(P) xi(k)
// through f and x(n+1|n) + sqrt(P(n+1|n)) eta(k) through h. Draws come from
// `rng`, which the state owns so runs are reproducible from the seed.
struct UKFState {
    GaussianEstimate estimate;
    int sigma_points = kDefaultSigmaPoints;
    RngStream rng{1, 0};
    RVector predicted_mean;        // x(n+1|n) of the last step
    RMatrix predicted_covariance;  // P(n+1|n) of the last step
};

void ukf_step(const StateSpaceModel& model, UKFState& state, const RVector& z, const RVector& u = {},
              const RVector& u_next = {});

// Symmetric square root by the spectral method; negative rounding clipped.
RMatrix psd_sqrt(const RMatrix& p);
// Symmetrizes and clips negative eigenvalues to zero.
RMatrix project_psd(const RMatrix& p);

// ------ LDP tracking controller ------

// chi = [e; f] with e the estimation error and f = x_d - x(n|n) the tracking
// error, W = [w; v; sqrt(P) xi_1; sqrt(P+) eta_1] and
//   chi[n+1] = (G0 + G1 Kc G2) chi[n] + G3 W[n+1],  Cov W = R_W.
struct ControllerDesign {
    RMatrix g0, g1, g2, g3;
    RMatrix noise_covariance;  // R_W = diag[Q, R, P/K, P+/K]
    RMatrix filtered;          // P, the converged P(n|n) at the operating point
    RMatrix predicted;         // P+ = F P F' + Q
    RMatrix filter_gain;       // steady measurement gain at the operating point

    Eigen::Index chi_dim() const { return g0.rows(); }
    RMatrix closed_loop(const RMatrix& kc) const { return g0 + g1 * kc * g2; }
};

// Linearizes about a stationary desired state x_d (f(x_d, u) = x_d is not
// required; F and H are the Jacobians there).
ControllerDesign linearize_controller(const StateSpaceModel& model, const RVector& operating_point,
                                     const RVector& input, int sigma_points = kDefaultSigmaPoints);

// R_chi over chi[1..N], stacked: block (n, m) is
// sum_{k=0}^{min(n,m)-1} M^{n-1-k} G3 R_W G3' (M')^{m-1-k}.
RMatrix chi_covariance(const ControllerDesign& design, const RMatrix& kc, int horizon);

struct GainScore {
    RMatrix gain;
    double spectral_radius;
    double lambda_max;  // of R_chi; infinity for unstable gains
    double min_rate;    // delta / (2 lambda_max); 0 for unstable gains
};

struct ControllerResult {
    std::vector<GainScore> table;
    std::size_t best;
    bool objective_flat;  // every stable gain scores the same (to 1e-12 relative)
};

// Scores each candidate gain. Throws std::invalid_argument when no gain gives
// a closed loop with spectral radius below one.
ControllerResult ldp_ukf_controller(const ControllerDesign& design, const std::vector<RMatrix>& gains, int horizon,
                                   double threshold);

// Monte Carlo frequency of sum_n ||chi[n]||^2 > threshold for chi driven by
// sqrt(scale) W over n = 1..horizon.
double chi_exceedance_frequency(const ControllerDesign& design, const RMatrix& kc, int horizon, double threshold,
                                double scale, int trials, std::uint64_t seed);

}  // namespace qlab::filters
