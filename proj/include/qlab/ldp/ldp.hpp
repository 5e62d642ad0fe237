#pragma once

#include "qlab/numkernel/rng.hpp"
#include "qlab/numkernel/types.hpp"

#include <functional>
#include <vector>

namespace qlab::ldp {

// ------ Markov empirical measure ------

class MarkovModel {
public:
    MarkovModel(RMatrix transition, RVector initial);
    // Initial law defaults to uniform.
    explicit MarkovModel(RMatrix transition);

    const RMatrix& transition() const { return p_; }
    const RVector& initial() const { return mu_; }
    Eigen::Index states() const { return p_.rows(); }
    bool irreducible() const { return irreducible_; }
    RVector stationary() const;

private:
    RMatrix p_;
    RVector mu_;
    bool irreducible_;
};

// log of the Perron root of diag(exp f) P.
double tilted_max_eig(const MarkovModel& model, const RVector& f);

struct RateResult {
    double value;
    RVector argmax;    // f for rate_I (sum pinned to 0), w = log u for rate_J
    double grad_norm;  // at termination
    int iterations;
    bool converged;    // false flags an optimizer stall; grad_norm reports how far off
};

RateResult rate_I(const MarkovModel& model, const RVector& q);
RateResult rate_J(const MarkovModel& model, const RVector& q);

// ------ Poisson ------

struct PoissonRate {
    double intensity;
    double scale = 1.0;
};

double poisson_rate_eta(const PoissonRate& rate, double y);

// Trapezoid integral of eta(X' - F(X)) over the sample times; X' by
// second-order finite differences.
double poisson_path_rate(const PoissonRate& rate, const std::vector<double>& times, const std::vector<double>& path,
                         const std::function<double(double)>& drift);

struct QuadratureGrid {
    RMatrix points;  // one point per row
    RVector weights;
};

// Midpoint rule on the box [lo, hi] with `per_dim` cells along each axis.
QuadratureGrid box_grid(const RVector& lo, const RVector& hi, int per_dim);

// integral of lambda_inf(x / |x|) (exp(f(x)) - 1) dx; lambda_inf sees the unit direction.
double scaled_poisson_field_lmgf(const std::function<double(const RVector&)>& lambda_inf,
                                 const std::function<double(const RVector&)>& f, const QuadratureGrid& grid);

// ------ diffusion exit ------

struct ExitProblem {
    std::function<double(double)> drift;
    std::function<double(double)> diffusion;
    double lower;
    double upper;
    double start;
};

struct ExitValueOptions {
    int grid_points = 401;
    int controls = 81;
    double control_span = 0.0;  // 0: 5 max|f| / min|g|, at least 5 / min|g|
    double dt = 0.0;            // 0: largest step meeting the CFL bound
    double tol = 1e-12;
    int max_sweeps = 200000;
};

struct ExitValue {
    RVector grid;
    RVector value;  // minimal action inf int |u|^2/2 to reach the boundary
    double control_spacing;
    double dt;
    int sweeps;
    double at(double x) const;  // linear interpolation
};

// Semi-Lagrangian value iteration for dx = (f + g u) dt with running cost
// |u|^2 / 2. Throws std::invalid_argument when a requested dt breaks the CFL
// bound max|f + g u| dt <= dx.
ExitValue exit_value(const ExitProblem& problem, const ExitValueOptions& opts = {});

struct ExitMcOptions {
    int trials = 200;
    double dt = 0.01;
    long long max_steps = 10'000'000;
    std::uint64_t seed = 1;
    int jobs = 1;
};

struct ExitMcRow {
    double eps;
    double mean_tau;
    double std_error;
    double eps_log_mean_tau;
    int trials_used;
    double capped_fraction;  // paths that hit max_steps, excluded from the mean
};

struct ExitMcTable {
    std::vector<ExitMcRow> rows;
    double slope;  // least-squares slope of log mean tau against 1/eps (eps log mean tau for one eps)
};

// Euler-Maruyama for dX = f dt + sqrt(eps) g dW with absorbing ends; a
// Brownian-bridge test catches crossings between grid times.
ExitMcTable exit_mc(const ExitProblem& problem, const std::vector<double>& eps_list, const ExitMcOptions& opts = {});

// ------ Gaussian paths ------

struct GaussianPathModel {
    RMatrix covariance;  // R_chi over the stacked horizon
    double threshold;    // delta
};

// (1/2) chi^T R^{-1} chi
double gaussian_path_rate(const GaussianPathModel& model, const RVector& chi);

struct BallMinimum {
    double rate;        // delta / (2 lambda_max)
    RVector minimizer;  // sqrt(delta) times the top eigenvector
    double lambda_max;
};

BallMinimum min_rate_over_ball(const GaussianPathModel& model);

// ------ branching ------

// F_n(z) = phi(F_{n-1}(z)), F_0(z) = z, for phi given by its coefficients.
RVector branching_pgf_iterate(const RVector& phi, int n, const RVector& z);
double pgf_value(const RVector& phi, double z);
// Smallest fixed point of phi on [0, 1].
double extinction_prob(const RVector& phi);

}  // namespace qlab::ldp
